use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use semfield_ffi::*;

fn core_data(rel: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(rel);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sf_last_error_message()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn field_table() {
    assert_eq!(sf_field_count(), 41);
    let name = unsafe { CStr::from_ptr(sf_field_name(2)) };
    assert_eq!(name.to_str().unwrap(), "noun.animal");
    assert!(sf_field_name(41).is_null());
}

#[test]
fn full_pipeline_through_handles() {
    unsafe {
        let mut lexicon = ptr::null_mut();
        assert_eq!(
            sf_lexicon_load_plain(core_data("mini_lexicon.tsv").as_ptr(), &mut lexicon),
            SfStatus::Ok
        );
        assert!(sf_lexicon_len(lexicon) > 100);

        let mut ids = [0u8; 4];
        let mut n = 0;
        let token = CString::new("love").unwrap();
        assert_eq!(
            sf_lexicon_lookup(lexicon, token.as_ptr(), ids.as_mut_ptr(), 4, &mut n),
            SfStatus::Ok
        );
        let names: Vec<&str> = ids[..n]
            .iter()
            .map(|&i| CStr::from_ptr(sf_field_name(i)).to_str().unwrap())
            .collect();
        assert_eq!(names, ["noun.feeling", "verb.emotion"]);
        assert_eq!(
            sf_lexicon_lookup(lexicon, token.as_ptr(), ids.as_mut_ptr(), 1, &mut n),
            SfStatus::BufferTooSmall
        );
        assert_eq!(n, 2);

        let mut corpus = ptr::null_mut();
        assert_eq!(
            sf_corpus_ingest(core_data("mini_corpus").as_ptr(), &mut corpus),
            SfStatus::Ok
        );
        assert_eq!(sf_corpus_len(corpus), 24);

        let mut matrix = ptr::null_mut();
        assert_eq!(
            sf_matrix_build(corpus, lexicon, SfPolysemy::Full, &mut matrix),
            SfStatus::Ok
        );
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(sf_matrix_dims(matrix, &mut rows, &mut cols), SfStatus::Ok);
        assert_eq!((rows, cols), (41, 24));
        let mut column = [0.0; 41];
        assert_eq!(
            sf_matrix_column(matrix, 0, column.as_mut_ptr(), 41, &mut n),
            SfStatus::Ok
        );
        assert!((column.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(
            sf_matrix_column(matrix, 24, column.as_mut_ptr(), 41, &mut n),
            SfStatus::OutOfRange
        );

        let mut svd = ptr::null_mut();
        assert_eq!(sf_svd_compute(matrix, &mut svd), SfStatus::Ok);
        let rank = sf_svd_rank(svd);
        assert!(rank >= 4);
        let mut sigma = vec![0.0; rank];
        assert_eq!(sf_svd_sigma(svd, sigma.as_mut_ptr(), rank, &mut n), SfStatus::Ok);
        assert!(sigma.windows(2).all(|w| w[0] >= w[1]));

        let mut coords = [0.0; 3];
        assert_eq!(
            sf_svd_project(
                svd,
                3,
                SfReducedCoords::Scaled,
                column.as_ptr(),
                41,
                coords.as_mut_ptr(),
                3,
                &mut n
            ),
            SfStatus::Ok
        );
        assert_eq!(
            sf_svd_project(
                svd,
                rank + 1,
                SfReducedCoords::Whitened,
                column.as_ptr(),
                41,
                coords.as_mut_ptr(),
                3,
                &mut n
            ),
            SfStatus::OutOfRange
        );
        assert!(last_error().contains("retained dimension"), "{}", last_error());

        let mut json = ptr::null_mut();
        assert_eq!(sf_matrix_to_json(matrix, &mut json), SfStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"columns\""));
        sf_string_free(json);

        sf_svd_free(svd);
        sf_matrix_free(matrix);
        sf_corpus_free(corpus);
        sf_lexicon_free(lexicon);
    }
}

#[test]
fn ward_on_flat_buffer() {
    let points = [0.0, 0.0, 0.0, 1.0, 4.0, 0.0, 4.0, 1.0];
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(sf_ward_cluster(points.as_ptr(), 4, 2, &mut d), SfStatus::Ok);
        assert_eq!(sf_dendrogram_leaves(d), 4);
        assert_eq!(sf_dendrogram_merges(d), 3);
        let (mut l, mut r, mut h, mut s) = (0, 0, 0.0, 0);
        let expected = [(0, 1, 0.5, 2), (2, 3, 0.5, 2), (4, 5, 16.0, 4)];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(
                sf_dendrogram_merge(d, i, &mut l, &mut r, &mut h, &mut s),
                SfStatus::Ok
            );
            assert_eq!((l, r, s), (e.0, e.1, e.3));
            assert!((h - e.2).abs() < 1e-12);
        }
        assert_eq!(
            sf_dendrogram_merge(d, 3, &mut l, &mut r, &mut h, &mut s),
            SfStatus::OutOfRange
        );

        let mut labels = [9usize; 4];
        let mut n = 0;
        assert_eq!(
            sf_dendrogram_cut(d, 2, labels.as_mut_ptr(), 4, &mut n),
            SfStatus::Ok
        );
        assert_eq!(labels, [0, 0, 1, 1]);
        assert_eq!(
            sf_dendrogram_cut(d, 5, labels.as_mut_ptr(), 4, &mut n),
            SfStatus::InvalidParameter
        );

        let mut json = ptr::null_mut();
        assert_eq!(sf_dendrogram_to_json(d, &mut json), SfStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"n_leaves\": 4"));
        sf_string_free(json);
        sf_dendrogram_free(d);

        assert_eq!(
            sf_ward_cluster(points.as_ptr(), 1, 2, &mut d),
            SfStatus::InvalidParameter
        );
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut lexicon = ptr::null_mut();
        assert_eq!(
            sf_lexicon_load_plain(ptr::null(), &mut lexicon),
            SfStatus::NullArgument
        );
        assert!(last_error().contains("path"));

        let missing = CString::new("/nonexistent/lexicon.tsv").unwrap();
        assert_eq!(
            sf_lexicon_load_plain(missing.as_ptr(), &mut lexicon),
            SfStatus::Io
        );
        assert!(last_error().contains("/nonexistent/lexicon.tsv"));

        let bad = [0xffu8, 0];
        assert_eq!(
            sf_corpus_ingest(bad.as_ptr().cast(), &mut ptr::null_mut()),
            SfStatus::InvalidUtf8
        );

        let dir = tempfile::tempdir().unwrap();
        let tsv = dir.path().join("bad.tsv");
        std::fs::write(&tsv, "noun.nothing\tword\n").unwrap();
        let tsv = CString::new(tsv.to_str().unwrap()).unwrap();
        assert_eq!(sf_lexicon_load_plain(tsv.as_ptr(), &mut lexicon), SfStatus::Parse);

        let root = dir.path().join("corpus/ann");
        std::fs::create_dir_all(&root).unwrap();
        std::fs::write(root.join("a.txt"), "nothing from the lexicon").unwrap();
        let mut corpus = ptr::null_mut();
        let root = CString::new(dir.path().join("corpus").to_str().unwrap()).unwrap();
        assert_eq!(sf_corpus_ingest(root.as_ptr(), &mut corpus), SfStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(
            sf_lexicon_load_plain(core_data("mini_lexicon.tsv").as_ptr(), &mut lexicon),
            SfStatus::Ok
        );
        let mut matrix = ptr::null_mut();
        assert_eq!(
            sf_matrix_build(corpus, lexicon, SfPolysemy::Fractional, &mut matrix),
            SfStatus::EmptySemanticColumn
        );
        assert!(matrix.is_null());

        assert_eq!(
            sf_matrix_dims(ptr::null(), &mut 0, &mut 0),
            SfStatus::NullArgument
        );
        sf_corpus_free(corpus);
        sf_lexicon_free(lexicon);
        sf_lexicon_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/semfield.h")).unwrap();
    let source = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 25);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Compiles and runs a C program against the generated header and the
/// static library. Skipped when no C compiler is on the path.
#[test]
fn c_program_links_against_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let target_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = target_dir.join("libsemfield_ffi.a");
    if !lib.is_file()
        || std::process::Command::new("cc")
            .arg("--version")
            .output()
            .is_err()
    {
        eprintln!("skipped: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "0 0 1 1 4 5 16.0\nnoun.tops\n"
    );
}
