use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use dgm_ffi::*;

fn toy(file: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/toy")
        .join(file);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = dgm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load_toy() -> *mut DgmGraph {
    let mut g = ptr::null_mut();
    let s = unsafe {
        dgm_graph_load_csv(
            toy("nodes.csv").as_ptr(),
            toy("edges.csv").as_ptr(),
            false,
            &mut g,
        )
    };
    assert_eq!(s, DgmStatus::Ok);
    g
}

#[test]
fn abi_version() {
    assert_eq!(dgm_abi_version(), DGM_ABI_VERSION);
}

#[test]
fn load_and_query_toy_graph() {
    let g = load_toy();
    unsafe {
        assert_eq!(dgm_graph_node_count(g), 4);
        assert_eq!(dgm_graph_edge_count(g), 3);

        let mut needed = 0;
        let mut small = [0 as std::ffi::c_char; 3];
        let s = dgm_graph_node_id(g, 0, small.as_mut_ptr(), small.len(), &mut needed);
        assert_eq!(s, DgmStatus::BufferTooSmall);
        assert_eq!(needed, "b:app".len() + 1);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(
            dgm_graph_node_id(g, 0, buf.as_mut_ptr(), buf.len(), ptr::null_mut()),
            DgmStatus::Ok
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "b:app");

        let mut idx = 99;
        let id = CString::new("a:lib").unwrap();
        assert_eq!(dgm_graph_index_of(g, id.as_ptr(), &mut idx), DgmStatus::Ok);
        assert_eq!(idx, 2);
        dgm_graph_free(g);
    }
}

#[test]
fn metrics_into_caller_buffers() {
    let g = load_toy();
    unsafe {
        let mut pr = [0.0; 4];
        let mut iters = 0;
        assert_eq!(
            dgm_pagerank(g, 0.85, 1e-12, 500, pr.as_mut_ptr(), 4, &mut iters),
            DgmStatus::Ok
        );
        assert!(iters > 1);
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pr[3] > pr[2] && pr[2] > pr[1] && pr[1] > pr[0]);

        assert_eq!(
            dgm_pagerank(g, 0.85, 1e-12, 1, pr.as_mut_ptr(), 4, ptr::null_mut()),
            DgmStatus::NotConverged
        );

        let mut bc = [0.0; 4];
        assert_eq!(
            dgm_betweenness(g, 0, 0, false, bc.as_mut_ptr(), 4),
            DgmStatus::Ok
        );
        assert_eq!(bc, [0.0, 2.0, 2.0, 0.0]);

        let mut labels = [9u32; 4];
        let mut count = 0;
        assert_eq!(
            dgm_components(g, true, labels.as_mut_ptr(), 4, &mut count),
            DgmStatus::Ok
        );
        assert_eq!(count, 4);
        assert_eq!(
            dgm_components(g, false, labels.as_mut_ptr(), 4, &mut count),
            DgmStatus::Ok
        );
        assert_eq!((count, labels), (1, [0; 4]));

        assert_eq!(
            dgm_betweenness(g, 0, 0, false, bc.as_mut_ptr(), 3),
            DgmStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 4"));
        dgm_graph_free(g);
    }
}

#[test]
fn generators_sampling_and_snapshots() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(
            dgm_synth_preferential_attachment(100, 2, 7, false, &mut g),
            DgmStatus::Ok
        );
        assert_eq!(dgm_graph_edge_count(g), 3 + 2 * 97);

        let mut s = ptr::null_mut();
        assert_eq!(
            dgm_graph_sample(g, 3, 1, DgmDirection::Both, &mut s),
            DgmStatus::Ok
        );
        assert!(dgm_graph_node_count(s) > 3 && dgm_graph_node_count(s) <= 100);

        let dir = std::env::temp_dir().join(format!("dgm-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = CString::new(dir.join("g.dgm").to_str().unwrap()).unwrap();
        assert_eq!(dgm_graph_save_snapshot(g, path.as_ptr()), DgmStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(
            dgm_graph_load_snapshot(path.as_ptr(), &mut back),
            DgmStatus::Ok
        );
        assert_eq!(dgm_graph_edge_count(back), dgm_graph_edge_count(g));
        std::fs::remove_dir_all(&dir).unwrap();

        let mut ws = ptr::null_mut();
        assert_eq!(
            dgm_synth_rewired_lattice(50, 3, 0.1, 1, false, &mut ws),
            DgmStatus::InvalidArgument
        );
        assert!(ws.is_null());
        assert!(last_error().contains("even"));
        assert_eq!(
            dgm_synth_uniform_random(20, 0.2, 1, true, &mut ws),
            DgmStatus::Ok
        );

        for h in [g, s, back, ws] {
            dgm_graph_free(h);
        }
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        let missing = CString::new("/nonexistent/edges.csv").unwrap();
        let s = dgm_graph_load_csv(toy("nodes.csv").as_ptr(), missing.as_ptr(), false, &mut g);
        assert_eq!(s, DgmStatus::Io);
        assert!(last_error().contains("/nonexistent/edges.csv"));
        assert_eq!(
            dgm_graph_load_csv(ptr::null(), missing.as_ptr(), false, &mut g),
            DgmStatus::NullPointer
        );
        assert_eq!(dgm_graph_node_count(ptr::null()), 0);
        let mut pr = [0.0; 1];
        assert_eq!(
            dgm_pagerank(
                ptr::null(),
                0.85,
                1e-9,
                10,
                pr.as_mut_ptr(),
                1,
                ptr::null_mut()
            ),
            DgmStatus::NullPointer
        );
        dgm_graph_free(ptr::null_mut());
    }
}
