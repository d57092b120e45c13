//! C ABI over `semfield`.
//!
//! Every fallible function returns an [`SfStatus`] and writes its result
//! through an out-pointer. On failure, [`sf_last_error_message`] describes the
//! error until the next call on the same thread. Handles are opaque, immutable
//! once created, and must be released with the matching `*_free` function.
//! Strings returned by `*_to_json` are owned by the caller and released with
//! [`sf_string_free`].
//!
//! Buffer-filling functions take a capacity and report the required length
//! through `out_len`; when the capacity is too small they write nothing and
//! return [`SfStatus::BufferTooSmall`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::OnceLock;

use semfield::{
    build_field_matrix_with, build_lexicon_from_dir, cut_dendrogram, ingest_directory, json,
    load_plain_lexicon, svd, ward_cluster, ClusterParams, Corpus, Dendrogram, Error, FieldMatrix, Lexicon,
    Polysemy, ReducedCoords, SvdFactorization, FIELD_NAMES, N_FIELDS,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidParameter = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    EmptySemanticColumn = 8,
    NoConvergence = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfPolysemy {
    Full = 0,
    Fractional = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfReducedCoords {
    Whitened = 0,
    Scaled = 1,
}

pub struct SfLexicon(Lexicon);
pub struct SfCorpus(Corpus);
pub struct SfMatrix(FieldMatrix);
pub struct SfSvd(SvdFactorization);
pub struct SfDendrogram(Dendrogram);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> SfStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::Io { .. } | Error::Stream(_) => SfStatus::Io,
        Error::MalformedLine { .. }
        | Error::UnknownFieldName(_)
        | Error::Encoding(_)
        | Error::Json(_)
        | Error::Config(_) => SfStatus::Parse,
        Error::IndexOutOfRange { .. } | Error::RankOutOfRange { .. } => SfStatus::OutOfRange,
        Error::EmptySemanticColumn { .. } => SfStatus::EmptySemanticColumn,
        Error::NoConvergence { .. } => SfStatus::NoConvergence,
        _ => SfStatus::InvalidParameter,
    }
}

fn fail<T>(status: SfStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status and message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SfStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .map_or_else(|| fail(SfStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .map_or_else(|| fail(SfStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(SfStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(SfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Copies `src` into `dst[..cap]`, always reporting the length.
unsafe fn fill<T: Copy>(src: &[T], dst: *mut T, cap: usize, out_len: *mut usize) -> Result<(), Failure> {
    if let Some(len) = out_len.as_mut() {
        *len = src.len();
    }
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return fail(SfStatus::NullArgument, "output buffer is null");
    }
    if cap < src.len() {
        return fail(
            SfStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn export_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), Failure> {
    let out = out_ptr(out, "out")?;
    let text = json::to_string(value)?;
    *out = CString::new(text)
        .or_else(|_| fail(SfStatus::InvalidParameter, "JSON contains NUL"))?
        .into_raw();
    Ok(())
}

// ---------------------------------------------------------------------------
// Errors and strings
// ---------------------------------------------------------------------------

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by a `*_to_json` function.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of semantic fields (41).
#[no_mangle]
pub extern "C" fn sf_field_count() -> usize {
    N_FIELDS
}

/// Static name of field `id`, or null when out of range.
#[no_mangle]
pub extern "C" fn sf_field_name(id: u8) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| FIELD_NAMES.iter().map(|n| CString::new(*n).unwrap()).collect());
    names.get(id as usize).map_or(ptr::null(), |n| n.as_ptr())
}

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

/// Loads a `field_name<TAB>word word ...` file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_load_plain(path: *const c_char, out: *mut *mut SfLexicon) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = PathBuf::from(string(path, "path")?);
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        *out = boxed(SfLexicon(load_plain_lexicon(std::io::BufReader::new(file))?));
        Ok(())
    })
}

/// Builds a lexicon from the `data.noun` and `data.verb` files in `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_build_wordnet(dir: *const c_char, out: *mut *mut SfLexicon) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let dir = PathBuf::from(string(dir, "dir")?);
        *out = boxed(SfLexicon(build_lexicon_from_dir(&dir)?));
        Ok(())
    })
}

/// Number of word forms.
///
/// # Safety
/// `lexicon` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_len(lexicon: *const SfLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.len())
}

/// Field ids of `token`, ascending. An unknown token yields length 0.
///
/// # Safety
/// `fields` must hold `cap` bytes (or be null with `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_lookup(
    lexicon: *const SfLexicon,
    token: *const c_char,
    fields: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> SfStatus {
    guard(|| {
        let lexicon = handle(lexicon, "lexicon")?;
        let ids: Vec<u8> = lexicon
            .0
            .lookup(string(token, "token")?)
            .iter()
            .map(|f| f.0)
            .collect();
        fill(&ids, fields, cap, out_len)
    })
}

/// # Safety
/// See [`sf_string_free`]; `out` receives a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_to_json(lexicon: *const SfLexicon, out: *mut *mut c_char) -> SfStatus {
    guard(|| export_json(&handle(lexicon, "lexicon")?.0, out))
}

/// # Safety
/// `lexicon` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_lexicon_free(lexicon: *mut SfLexicon) {
    free(lexicon)
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Ingests `root/<author>/<title>.txt`.
///
/// # Safety
/// `root` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_ingest(root: *const c_char, out: *mut *mut SfCorpus) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let root = PathBuf::from(string(root, "root")?);
        *out = boxed(SfCorpus(ingest_directory(&root)?));
        Ok(())
    })
}

/// Number of documents.
///
/// # Safety
/// `corpus` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_len(corpus: *const SfCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// See [`sf_string_free`]; `out` receives a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_to_json(corpus: *const SfCorpus, out: *mut *mut c_char) -> SfStatus {
    guard(|| export_json(&handle(corpus, "corpus")?.0, out))
}

/// # Safety
/// `corpus` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_free(corpus: *mut SfCorpus) {
    free(corpus)
}

// ---------------------------------------------------------------------------
// Field matrix
// ---------------------------------------------------------------------------

/// Builds the column-normalized field × document matrix.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_build(
    corpus: *const SfCorpus,
    lexicon: *const SfLexicon,
    polysemy: SfPolysemy,
    out: *mut *mut SfMatrix,
) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let polysemy = match polysemy {
            SfPolysemy::Full => Polysemy::Full,
            SfPolysemy::Fractional => Polysemy::Fractional,
        };
        let m = build_field_matrix_with(
            &handle(corpus, "corpus")?.0,
            &handle(lexicon, "lexicon")?.0,
            polysemy,
        )?;
        *out = boxed(SfMatrix(m));
        Ok(())
    })
}

/// Writes the number of fields (rows) and documents (columns).
///
/// # Safety
/// `matrix` must be live; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_dims(
    matrix: *const SfMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> SfStatus {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        *out_ptr(rows, "rows")? = m.n_fields();
        *out_ptr(cols, "cols")? = m.n_docs();
        Ok(())
    })
}

/// Copies column `j` (one document's field frequencies).
///
/// # Safety
/// `values` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_column(
    matrix: *const SfMatrix,
    j: usize,
    values: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> SfStatus {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        if j >= m.n_docs() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: m.n_docs(),
            }
            .into());
        }
        fill(m.values().column(j), values, cap, out_len)
    })
}

/// # Safety
/// See [`sf_string_free`]; `out` receives a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_to_json(matrix: *const SfMatrix, out: *mut *mut c_char) -> SfStatus {
    guard(|| export_json(&handle(matrix, "matrix")?.0, out))
}

/// # Safety
/// `matrix` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_free(matrix: *mut SfMatrix) {
    free(matrix)
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// Factors the matrix to its numerical rank.
///
/// # Safety
/// `matrix` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_svd_compute(matrix: *const SfMatrix, out: *mut *mut SfSvd) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(SfSvd(svd(&handle(matrix, "matrix")?.0)?));
        Ok(())
    })
}

/// Numerical rank.
///
/// # Safety
/// `svd` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sf_svd_rank(svd: *const SfSvd) -> usize {
    svd.as_ref().map_or(0, |s| s.0.rank())
}

/// Copies the singular values, descending.
///
/// # Safety
/// `sigma` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_svd_sigma(
    svd: *const SfSvd,
    sigma: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> SfStatus {
    guard(|| fill(handle(svd, "svd")?.0.sigma(), sigma, cap, out_len))
}

/// Projects a field-space vector of length `len` onto the `k` leading
/// singular directions, writing `k` coordinates.
///
/// # Safety
/// `vector` must hold `len` doubles and `coords` `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_svd_project(
    svd: *const SfSvd,
    k: usize,
    mode: SfReducedCoords,
    vector: *const f64,
    len: usize,
    coords: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> SfStatus {
    guard(|| {
        let f = &handle(svd, "svd")?.0;
        if vector.is_null() {
            return fail(SfStatus::NullArgument, "vector is null");
        }
        let v = std::slice::from_raw_parts(vector, len);
        let mode = match mode {
            SfReducedCoords::Whitened => ReducedCoords::Whitened,
            SfReducedCoords::Scaled => ReducedCoords::Scaled,
        };
        let p = f.truncate(k)?.project_document_with(v, mode)?;
        fill(&p, coords, cap, out_len)
    })
}

/// # Safety
/// `svd` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_svd_free(svd: *mut SfSvd) {
    free(svd)
}

// ---------------------------------------------------------------------------
// Ward clustering
// ---------------------------------------------------------------------------

/// Clusters `n` row-major points of dimension `dim` down to one cluster.
///
/// # Safety
/// `points` must hold `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_ward_cluster(
    points: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut SfDendrogram,
) -> SfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if points.is_null() {
            return fail(SfStatus::NullArgument, "points is null");
        }
        let total = n
            .checked_mul(dim)
            .map_or_else(|| fail(SfStatus::InvalidParameter, "n * dim overflows"), Ok)?;
        let flat = std::slice::from_raw_parts(points, total);
        let rows: Vec<&[f64]> = if dim == 0 {
            vec![&[][..]; n]
        } else {
            flat.chunks(dim).collect()
        };
        *out = boxed(SfDendrogram(ward_cluster(&rows, &ClusterParams::clusters(1))?));
        Ok(())
    })
}

/// Number of leaves.
///
/// # Safety
/// `dendrogram` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_leaves(dendrogram: *const SfDendrogram) -> usize {
    dendrogram.as_ref().map_or(0, |d| d.0.n_leaves)
}

/// Number of merges.
///
/// # Safety
/// `dendrogram` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_merges(dendrogram: *const SfDendrogram) -> usize {
    dendrogram.as_ref().map_or(0, |d| d.0.merges.len())
}

/// Merge `i`: it joins nodes `left < right` into node `n_leaves + i` of
/// `size` leaves at merge cost `height`.
///
/// # Safety
/// All out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_merge(
    dendrogram: *const SfDendrogram,
    i: usize,
    left: *mut usize,
    right: *mut usize,
    height: *mut f64,
    size: *mut usize,
) -> SfStatus {
    guard(|| {
        let d = &handle(dendrogram, "dendrogram")?.0;
        let m = d.merges.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: d.merges.len(),
        })?;
        *out_ptr(left, "left")? = m.left;
        *out_ptr(right, "right")? = m.right;
        *out_ptr(height, "height")? = m.height;
        *out_ptr(size, "size")? = m.size;
        Ok(())
    })
}

/// Cuts into `n_clusters` and writes one cluster id per leaf.
///
/// # Safety
/// `labels` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_cut(
    dendrogram: *const SfDendrogram,
    n_clusters: usize,
    labels: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> SfStatus {
    guard(|| {
        let a = cut_dendrogram(&handle(dendrogram, "dendrogram")?.0, n_clusters)?;
        fill(&a.doc_to_cluster, labels, cap, out_len)
    })
}

/// # Safety
/// See [`sf_string_free`]; `out` receives a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_to_json(
    dendrogram: *const SfDendrogram,
    out: *mut *mut c_char,
) -> SfStatus {
    guard(|| export_json(&handle(dendrogram, "dendrogram")?.0, out))
}

/// # Safety
/// `dendrogram` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_dendrogram_free(dendrogram: *mut SfDendrogram) {
    free(dendrogram)
}
