//! C interface to the `dwell4` four-mode double-well model.
//!
//! Every entry point returns a [`Dwell4Status`]. On failure the message is
//! kept per thread and can be read with [`dwell4_last_error`]. Trajectories
//! are returned as opaque handles that the caller releases with
//! [`dwell4_trajectory_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dwell4::dynamics::{integrate, IntegratorConfig, Termination, Trajectory};
use dwell4::eigensolver::{integrals_for, PotentialSpec};
use dwell4::fixed_points::{effective_fixed_points, EffectiveStability};
use dwell4::model::{self, classify_regime, Model, PendulumState, Regime};
use dwell4::ModelParams;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dwell4Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dwell4Regime {
    Rabi = 0,
    Mixed = 1,
    Josephson = 2,
    Fock = 3,
    Invalid = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dwell4Model {
    Full = 0,
    Averaged = 1,
    TwoMode = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dwell4Termination {
    Completed = 0,
    BoundaryHit = 1,
    StepFailure = 2,
    EnergyDrift = 3,
}

/// Model coefficients in recoil units; interaction terms include the atom number.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dwell4Params {
    pub e0: f64,
    pub e1: f64,
    pub j0: f64,
    pub j1: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub nu01: f64,
    pub delta_e: f64,
}

impl From<ModelParams> for Dwell4Params {
    fn from(p: ModelParams) -> Self {
        Self {
            e0: p.e0,
            e1: p.e1,
            j0: p.j0,
            j1: p.j1,
            nu0: p.nu0,
            nu1: p.nu1,
            nu01: p.nu01,
            delta_e: p.delta_e,
        }
    }
}

impl From<Dwell4Params> for ModelParams {
    fn from(p: Dwell4Params) -> Self {
        Self {
            e0: p.e0,
            e1: p.e1,
            j0: p.j0,
            j1: p.j1,
            nu0: p.nu0,
            nu1: p.nu1,
            nu01: p.nu01,
            delta_e: p.delta_e,
        }
    }
}

/// Opaque trajectory handle.
pub struct Dwell4Trajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type FfiResult = Result<(), (Dwell4Status, String)>;

fn guard(f: impl FnOnce() -> FfiResult) -> Dwell4Status {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Dwell4Status::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            Dwell4Status::Panic
        }
    }
}

fn invalid(e: impl ToString) -> (Dwell4Status, String) {
    (Dwell4Status::InvalidArgument, e.to_string())
}

fn numerical(e: impl ToString) -> (Dwell4Status, String) {
    (Dwell4Status::Numerical, e.to_string())
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (Dwell4Status, String)> {
    if p.is_null() {
        Err((Dwell4Status::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `dwell4_` call on the same thread.
#[no_mangle]
pub extern "C" fn dwell4_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dwell4_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solves the double-well eigenproblem and fills `out` with the coefficients
/// at interaction strength `gamma`. Pass 0 for `grid_points` or
/// `domain_halfwidth` to use the defaults.
///
/// # Safety
/// `out` must point to writable memory for one `Dwell4Params`.
#[no_mangle]
pub unsafe extern "C" fn dwell4_coefficients(
    v0: f64,
    gamma: f64,
    grid_points: usize,
    domain_halfwidth: f64,
    out: *mut Dwell4Params,
) -> Dwell4Status {
    guard(|| {
        non_null(out, "out")?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be non-negative, got {gamma}")));
        }
        let mut spec = PotentialSpec::new(v0);
        if grid_points != 0 {
            spec.grid_points = grid_points;
        }
        if domain_halfwidth != 0.0 {
            spec.domain_halfwidth = domain_halfwidth;
        }
        spec.validate().map_err(invalid)?;
        let integrals = integrals_for(&spec).map_err(numerical)?;
        *out = integrals.with_gamma(gamma).into();
        Ok(())
    })
}

/// Writes `chi0`, `chi1`, `chi01` to `chi[0..3]` and the regime to `regime`.
/// `v0` enables the barrier check when positive; `n_atoms` enables the Fock
/// check when positive.
///
/// # Safety
/// `params` must be readable, `chi` writable for three doubles and `regime`
/// writable for one value.
#[no_mangle]
pub unsafe extern "C" fn dwell4_classify(
    params: *const Dwell4Params,
    v0: f64,
    n_atoms: f64,
    chi: *mut f64,
    regime: *mut Dwell4Regime,
) -> Dwell4Status {
    guard(|| {
        non_null(params, "params")?;
        non_null(chi, "chi")?;
        non_null(regime, "regime")?;
        let p: ModelParams = (*params).into();
        let r = classify_regime(&p, (v0 > 0.0).then_some(v0), (n_atoms > 0.0).then_some(n_atoms));
        let chi = std::slice::from_raw_parts_mut(chi, 3);
        chi.copy_from_slice(&[r.chi0, r.chi1, r.chi01]);
        *regime = match r.regime {
            Regime::Rabi => Dwell4Regime::Rabi,
            Regime::Mixed => Dwell4Regime::Mixed,
            Regime::Josephson => Dwell4Regime::Josephson,
            Regime::Fock => Dwell4Regime::Fock,
            Regime::Invalid => Dwell4Regime::Invalid,
        };
        Ok(())
    })
}

/// Renormalized energy of `state = [z0, θ0, z1, θ1, z2, θ2]`.
///
/// # Safety
/// `params` and `state` (six doubles) must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dwell4_hamiltonian(
    params: *const Dwell4Params,
    state: *const f64,
    out: *mut f64,
) -> Dwell4Status {
    guard(|| {
        non_null(params, "params")?;
        non_null(state, "state")?;
        non_null(out, "out")?;
        let s = read_state(state);
        *out = model::hamiltonian(&s, &(*params).into()).map_err(invalid)?;
        Ok(())
    })
}

unsafe fn read_state(state: *const f64) -> PendulumState {
    let mut a = [0.0; 6];
    a.copy_from_slice(std::slice::from_raw_parts(state, 6));
    PendulumState::from(a)
}

/// Integrates from `initial` (six doubles). Non-positive `t_end`,
/// `sample_interval`, `rel_tol` or `abs_tol` select the defaults. A run that
/// stops early still yields a handle; query its termination.
///
/// # Safety
/// `params` and `initial` must be readable; `out` must be writable. The
/// handle written to `out` must be released with `dwell4_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn dwell4_integrate(
    params: *const Dwell4Params,
    initial: *const f64,
    model: Dwell4Model,
    t_end: f64,
    sample_interval: f64,
    rel_tol: f64,
    abs_tol: f64,
    out: *mut *mut Dwell4Trajectory,
) -> Dwell4Status {
    guard(|| {
        non_null(params, "params")?;
        non_null(initial, "initial")?;
        non_null(out, "out")?;
        *out = std::ptr::null_mut();
        let mut cfg = IntegratorConfig {
            model: match model {
                Dwell4Model::Full => Model::Full,
                Dwell4Model::Averaged => Model::Averaged,
                Dwell4Model::TwoMode => Model::TwoMode,
            },
            t_end: (t_end > 0.0).then_some(t_end),
            sample_interval: (sample_interval > 0.0).then_some(sample_interval),
            ..Default::default()
        };
        if rel_tol > 0.0 {
            cfg.rel_tol = rel_tol;
        }
        if abs_tol > 0.0 {
            cfg.abs_tol = abs_tol;
        }
        let tr = integrate(&read_state(initial), &(*params).into(), &cfg).map_err(invalid)?;
        *out = Box::into_raw(Box::new(Dwell4Trajectory { inner: tr }));
        Ok(())
    })
}

/// Number of stored samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dwell4_trajectory_len(traj: *const Dwell4Trajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dwell4_trajectory_termination(
    traj: *const Dwell4Trajectory,
    out: *mut Dwell4Termination,
) -> Dwell4Status {
    guard(|| {
        non_null(traj, "traj")?;
        non_null(out, "out")?;
        *out = match (*traj).inner.termination {
            Termination::Completed => Dwell4Termination::Completed,
            Termination::BoundaryHit => Dwell4Termination::BoundaryHit,
            Termination::StepFailure => Dwell4Termination::StepFailure,
            Termination::EnergyDrift => Dwell4Termination::EnergyDrift,
        };
        Ok(())
    })
}

/// Copies the samples out. `times` and `energy` need `capacity` doubles,
/// `states` needs `6 * capacity`; any of them may be null to skip it.
///
/// # Safety
/// `traj` must be a live handle; non-null buffers must be writable for the
/// sizes above.
#[no_mangle]
pub unsafe extern "C" fn dwell4_trajectory_copy(
    traj: *const Dwell4Trajectory,
    times: *mut f64,
    states: *mut f64,
    energy: *mut f64,
    capacity: usize,
) -> Dwell4Status {
    guard(|| {
        non_null(traj, "traj")?;
        let t = &(*traj).inner;
        let n = t.len();
        if capacity < n {
            return Err((
                Dwell4Status::BufferTooSmall,
                format!("capacity {capacity} < {n} samples"),
            ));
        }
        if !times.is_null() {
            std::slice::from_raw_parts_mut(times, n).copy_from_slice(&t.times);
        }
        if !energy.is_null() {
            std::slice::from_raw_parts_mut(energy, n).copy_from_slice(&t.energy);
        }
        if !states.is_null() {
            let dst = std::slice::from_raw_parts_mut(states, 6 * n);
            for (chunk, s) in dst.chunks_exact_mut(6).zip(&t.states) {
                chunk.copy_from_slice(&s.to_array());
            }
        }
        Ok(())
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dwell4_trajectory_free(traj: *mut Dwell4Trajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Fixed points of the (z1, θ1) pendulum with z0 frozen. Each root fills
/// three doubles of `out`: θ1, z1 and 1.0 (stable) or 0.0 (unstable).
/// `count` receives the number of roots even when `capacity` is too small.
///
/// # Safety
/// `params` must be readable, `count` writable and `out` writable for
/// `3 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn dwell4_effective_fixed_points(
    params: *const Dwell4Params,
    z2: f64,
    z0: f64,
    out: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> Dwell4Status {
    guard(|| {
        non_null(params, "params")?;
        non_null(count, "count")?;
        if !(z2.abs() < 1.0 && z0.abs() < 0.5 * (1.0 + z2)) {
            return Err(invalid(format!("(z0, z2) = ({z0}, {z2}) outside the physical domain")));
        }
        let roots = effective_fixed_points(&(*params).into(), z2, z0);
        *count = roots.len();
        if roots.len() > capacity {
            return Err((
                Dwell4Status::BufferTooSmall,
                format!("capacity {capacity} < {} roots", roots.len()),
            ));
        }
        if roots.is_empty() {
            return Ok(());
        }
        non_null(out, "out")?;
        let dst = std::slice::from_raw_parts_mut(out, 3 * roots.len());
        for (chunk, r) in dst.chunks_exact_mut(3).zip(&roots) {
            let stable = if r.stability == EffectiveStability::Stable { 1.0 } else { 0.0 };
            chunk.copy_from_slice(&[r.theta1_0, r.z1_0, stable]);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn params() -> Dwell4Params {
        ModelParams::new(1.0, 3.0, 0.01, 0.05, 0.08, 0.06, 0.004).into()
    }

    #[test]
    fn params_round_trip() {
        let p = params();
        let back: ModelParams = p.into();
        assert_eq!(Dwell4Params::from(back), p);
    }

    #[test]
    fn null_pointers_are_reported() {
        let s = unsafe { dwell4_hamiltonian(std::ptr::null(), std::ptr::null(), std::ptr::null_mut()) };
        assert_eq!(s, Dwell4Status::NullPointer);
        let msg = unsafe { CStr::from_ptr(dwell4_last_error()) };
        assert!(msg.to_str().unwrap().contains("params"));
    }

    #[test]
    fn success_clears_the_error() {
        let p = params();
        let state = [0.1, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut e = 0.0;
        unsafe {
            dwell4_hamiltonian(&p, std::ptr::null(), &mut e);
            assert_eq!(dwell4_hamiltonian(&p, state.as_ptr(), &mut e), Dwell4Status::Ok);
        }
        assert!(dwell4_last_error().is_null());
        assert!(e.is_finite());
    }
}
