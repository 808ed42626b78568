//! C interface to the `billiard` crate.
//!
//! Bodies and chains are opaque heap objects owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`BilliardStatus`]; on failure a description is available from
//! [`billiard_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use billiard::chain::{kernel_density, Chain, ChainState, KernelNormalization};
use billiard::sampler::normal_component_cdf;
use billiard::spectral2d::{build_transition_matrix, spectral_summary};
use billiard::{BodySpec, ConvexBody, DirectionLaw, Error, Point, RngStream};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilliardStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    NotOnBoundary = 4,
    BadDirection = 5,
    Geometry = 6,
    Singularity = 7,
    Numeric = 8,
    Io = 9,
    Panic = 10,
}

/// Outgoing direction law of a chain.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilliardLaw {
    Cosine = 0,
    UniformHemisphere = 1,
    CosineTwoSided = 2,
    UniformSphere = 3,
}

impl From<BilliardLaw> for DirectionLaw {
    fn from(law: BilliardLaw) -> Self {
        match law {
            BilliardLaw::Cosine => DirectionLaw::Cosine,
            BilliardLaw::UniformHemisphere => DirectionLaw::UniformHemisphere,
            BilliardLaw::CosineTwoSided => DirectionLaw::CosineTwoSided,
            BilliardLaw::UniformSphere => DirectionLaw::UniformSphere,
        }
    }
}

/// A validated convex body.
pub struct BilliardBody {
    body: ConvexBody,
}

/// A chain replica. Owns a copy of its body.
pub struct BilliardChain {
    body: ConvexBody,
    state: ChainState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BilliardStatus {
    match e {
        Error::Input(_) | Error::Json(_) => BilliardStatus::InvalidInput,
        Error::Domain(_) => BilliardStatus::NotOnBoundary,
        Error::Direction(_) => BilliardStatus::BadDirection,
        Error::Geometry(_) => BilliardStatus::Geometry,
        Error::Singularity => BilliardStatus::Singularity,
        Error::Numeric(_) => BilliardStatus::Numeric,
        Error::Io(_) => BilliardStatus::Io,
    }
}

/// Failure inside a call, before it is turned into a status code.
enum Fail {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> BilliardStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BilliardStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            BilliardStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string is not valid UTF-8".into());
            BilliardStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            BilliardStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn write_point(x: &Point, out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("output buffer"));
    }
    if len != x.len() {
        return Err(Error::Input(format!("buffer holds {len} values, point has {}", x.len())).into());
    }
    // SAFETY: caller guarantees `out` points to `len` writable doubles.
    unsafe { std::slice::from_raw_parts_mut(out, len) }.copy_from_slice(x.as_slice());
    Ok(())
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn billiard_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON body specification, e.g.
/// `{"type":"ball","dim":3,"radius":1.0}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn billiard_body_from_json(json: *const c_char, out: *mut *mut BilliardBody) -> BilliardStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Fail::Utf8)?;
        let body = BodySpec::from_json(text)?.build()?;
        *out = Box::into_raw(Box::new(BilliardBody { body }));
        Ok(())
    })
}

/// # Safety
/// `body` must come from [`billiard_body_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn billiard_body_free(body: *mut BilliardBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_body_dim(body: *const BilliardBody, out: *mut usize) -> BilliardStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(body, "body")?.body.dim();
        Ok(())
    })
}

/// Curvature bound `C`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_body_curvature_bound(body: *const BilliardBody, out: *mut f64) -> BilliardStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(body, "body")?.body.curvature_bound();
        Ok(())
    })
}

/// Diameter `D`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_body_diameter(body: *const BilliardBody, out: *mut f64) -> BilliardStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(body, "body")?.body.diameter();
        Ok(())
    })
}

/// One-step transition density between boundary points `u` and `v`, each of
/// `dim` coordinates. With `normalized` the value is a density with respect
/// to surface measure.
///
/// # Safety
/// `u` and `v` must point to `dim` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_kernel_density(
    body: *const BilliardBody,
    u: *const f64,
    v: *const f64,
    dim: usize,
    normalized: bool,
    out: *mut f64,
) -> BilliardStatus {
    guard(|| {
        let body = &deref(body, "body")?.body;
        let out = deref_mut(out, "out")?;
        if dim != body.dim() {
            return Err(Error::Input(format!("points have {dim} coordinates, body has dimension {}", body.dim())).into());
        }
        let u = body.boundary_point(Point::from_column_slice(slice(u, dim, "u")?))?;
        let v = body.boundary_point(Point::from_column_slice(slice(v, dim, "v")?))?;
        let norm = if normalized {
            KernelNormalization::SurfaceMeasure
        } else {
            KernelNormalization::Unnormalized
        };
        *out = kernel_density(body, &u, &v, norm)?;
        Ok(())
    })
}

/// CDF of the normal component `|w·n_x|` of a direction drawn from `law` in
/// dimension `n`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_normal_component_cdf(t: f64, n: usize, law: BilliardLaw, out: *mut f64) -> BilliardStatus {
    guard(|| {
        *deref_mut(out, "out")? = normal_component_cdf(t, n, law.into())?;
        Ok(())
    })
}

/// Spectral gap `1 − |λ_2|` of the `bins`-bin discretization of a planar body.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_spectral_gap(
    body: *const BilliardBody,
    bins: usize,
    quad_points: usize,
    out: *mut f64,
) -> BilliardStatus {
    guard(|| {
        let body = &deref(body, "body")?.body;
        let out = deref_mut(out, "out")?;
        let p = build_transition_matrix(body, bins, quad_points)?;
        *out = spectral_summary(&p)?.spectral_gap;
        Ok(())
    })
}

/// New chain at the body's first-coordinate maximizer, drawing from RNG
/// stream `(seed, stream)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_chain_new(
    body: *const BilliardBody,
    seed: u64,
    stream: u64,
    law: BilliardLaw,
    out: *mut *mut BilliardChain,
) -> BilliardStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let body = deref(body, "body")?.body.clone();
        let chain = Chain::new(&body, body.seed_point(), law.into(), RngStream::new(seed, stream));
        let state = chain.state();
        *out = Box::into_raw(Box::new(BilliardChain { body, state }));
        Ok(())
    })
}

/// # Safety
/// `chain` must come from [`billiard_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn billiard_chain_free(chain: *mut BilliardChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Advances the chain by `steps` transitions and writes the current position
/// into `position` (`len` must equal the dimension). On failure the chain is
/// left at its state before the call.
///
/// # Safety
/// `position` must point to `len` writable doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_chain_step(
    chain: *mut BilliardChain,
    steps: u64,
    position: *mut f64,
    len: usize,
) -> BilliardStatus {
    guard(|| {
        let c = deref_mut(chain, "chain")?;
        let mut replica = Chain::resume(&c.body, &c.state)?;
        for _ in 0..steps {
            replica.step()?;
        }
        write_point(&replica.current().position, position, len)?;
        c.state = replica.state();
        Ok(())
    })
}

/// Transitions taken since the chain was created.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn billiard_chain_steps_taken(chain: *const BilliardChain, out: *mut u64) -> BilliardStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(chain, "chain")?.state.k;
        Ok(())
    })
}
