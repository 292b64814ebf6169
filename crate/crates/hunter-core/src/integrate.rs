//! Adaptive Dormand-Prince 5(4) integration with dense output and events.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::GammaParams;
use crate::system::{sonic_discriminant, State};

/// A first-order system `x' = f(t, x)` of dimension `N`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, x: &[f64; N]) -> Result<[f64; N]>;
}

impl<const N: usize, S: OdeSystem<N> + ?Sized> OdeSystem<N> for &S {
    fn rhs(&self, t: f64, x: &[f64; N]) -> Result<[f64; N]> {
        (**self).rhs(t, x)
    }
}

impl<const N: usize, S: OdeSystem<N> + ?Sized> OdeSystem<N> for Box<S> {
    fn rhs(&self, t: f64, x: &[f64; N]) -> Result<[f64; N]> {
        (**self).rhs(t, x)
    }
}

/// Variable the stepper advances in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Abscissa {
    /// Step in `t` itself.
    Linear,
    /// Step in `ln t`; both endpoints must be positive.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    SonicCrossing,
    DensityFloor,
    Blowup,
}

/// A scalar function of `(t, x)` whose sign changes are located and reported.
pub struct Event<'a, const N: usize> {
    pub kind: EventKind,
    pub terminal: bool,
    pub g: Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(kind: EventKind, terminal: bool, g: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self { kind, terminal, g: Box::new(g) }
    }
}

/// Default vacuum threshold for density-like components.
pub const DENSITY_FLOOR: f64 = 1e-14;
/// Default magnitude at which a trajectory is declared to have blown up.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Terminal event firing when component 0, read as a density, drops below `floor`.
pub fn density_floor_event<'a>(floor: f64) -> Event<'a, 2> {
    Event::new(EventKind::DensityFloor, true, move |_, x| x[0] - floor)
}

/// Terminal event firing when any component exceeds `guard` in magnitude.
pub fn blowup_event<'a, const N: usize>(guard: f64) -> Event<'a, N> {
    Event::new(EventKind::Blowup, true, move |_, x| guard - x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Non-terminal event on the sonic discriminant of a `(ρ, u)` state.
pub fn sonic_event<'a>(params: GammaParams) -> Event<'a, 2> {
    Event::new(EventKind::SonicCrossing, false, move |y, x| {
        sonic_discriminant(&params, y, State { rho: x[0], u: x[1] })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub abscissa: Abscissa,
    pub max_steps: usize,
    /// Initial step in the stepping variable; chosen automatically if `None`.
    pub h_init: Option<f64>,
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }

    pub fn log(mut self) -> Self {
        self.abscissa = Abscissa::Log;
        self
    }
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, abscissa: Abscissa::Linear, max_steps: 2_000_000, h_init: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    Event(EventKind),
    /// The step size collapsed, usually at an unresolved singularity.
    StepUnderflow { t: f64 },
    MaxSteps,
}

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    s0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

/// Accepted steps plus the interpolation data between them.
#[derive(Debug, Clone)]
pub struct IntegrationResult<const N: usize> {
    pub abscissa: Abscissa,
    /// Step endpoints in the original variable, strictly monotone.
    pub samples: Vec<(f64, [f64; N])>,
    pub events: Vec<EventRecord>,
    pub termination: Termination,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> IntegrationResult<N> {
    fn to_s(&self, t: f64) -> f64 {
        match self.abscissa {
            Abscissa::Linear => t,
            Abscissa::Log => t.ln(),
        }
    }

    pub fn first(&self) -> (f64, [f64; N]) {
        self.samples[0]
    }

    pub fn last(&self) -> (f64, [f64; N]) {
        *self.samples.last().expect("at least the initial sample")
    }

    /// Interpolated state at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if self.segments.is_empty() {
            let (t0, x0) = self.samples[0];
            return (t == t0).then_some(x0);
        }
        let s = self.to_s(t);
        let forward = self.segments[0].h > 0.0;
        let idx = self.segments.partition_point(|seg| {
            let end = seg.s0 + seg.h;
            if forward { end < s } else { end > s }
        });
        let seg = self.segments.get(idx)?;
        let theta = (s - seg.s0) / seg.h;
        if !(-1e-9..=1.0 + 1e-9).contains(&theta) {
            return None;
        }
        Some(dense_eval(seg, theta))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.last().0)
    }
}

fn dense_eval<const N: usize>(seg: &Segment<N>, theta: f64) -> [f64; N] {
    let t1 = 1.0 - theta;
    let r = &seg.rcont;
    std::array::from_fn(|i| r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i]))))
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Wraps a system so that it is stepped in `s` according to the abscissa.
struct Stepped<'a, const N: usize, S: OdeSystem<N> + ?Sized> {
    sys: &'a S,
    abscissa: Abscissa,
}

impl<const N: usize, S: OdeSystem<N> + ?Sized> Stepped<'_, N, S> {
    fn t_of(&self, s: f64) -> f64 {
        match self.abscissa {
            Abscissa::Linear => s,
            Abscissa::Log => s.exp(),
        }
    }

    fn f(&self, s: f64, x: &[f64; N]) -> Result<[f64; N]> {
        let t = self.t_of(s);
        let d = self.sys.rhs(t, x)?;
        let scale = match self.abscissa {
            Abscissa::Linear => 1.0,
            Abscissa::Log => t,
        };
        let out: [f64; N] = std::array::from_fn(|i| d[i] * scale);
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::StiffnessFailure { x: t })
        }
    }
}

fn axpy<const N: usize>(x: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates from `t0` to `t1`, mapping step underflow to an error.
pub fn integrate<const N: usize, S: OdeSystem<N> + ?Sized>(
    sys: &S,
    t0: f64,
    x0: [f64; N],
    t1: f64,
    opts: &IntegrateOptions,
    events: &[Event<'_, N>],
) -> Result<IntegrationResult<N>> {
    let res = integrate_raw(sys, t0, x0, t1, opts, events)?;
    match res.termination {
        Termination::StepUnderflow { t } => Err(Error::StiffnessFailure { x: t }),
        _ => Ok(res),
    }
}

/// Integrates from `t0` to `t1`, reporting step underflow as a termination
/// kind so callers can still inspect the partial trajectory.
pub fn integrate_raw<const N: usize, S: OdeSystem<N> + ?Sized>(
    sys: &S,
    t0: f64,
    x0: [f64; N],
    t1: f64,
    opts: &IntegrateOptions,
    events: &[Event<'_, N>],
) -> Result<IntegrationResult<N>> {
    if opts.abscissa == Abscissa::Log && (t0 <= 0.0 || t1 <= 0.0) {
        return Err(Error::Domain("log stepping needs positive endpoints".into()));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    let st = Stepped { sys, abscissa: opts.abscissa };
    let (s0, s1) = match opts.abscissa {
        Abscissa::Linear => (t0, t1),
        Abscissa::Log => (t0.ln(), t1.ln()),
    };
    let mut result = IntegrationResult {
        abscissa: opts.abscissa,
        samples: vec![(t0, x0)],
        events: Vec::new(),
        termination: Termination::Completed,
        segments: Vec::new(),
    };
    if s0 == s1 {
        return Ok(result);
    }
    let dir = (s1 - s0).signum();
    let span = (s1 - s0).abs();
    let h_min = 1e-14 * s0.abs().max(s1.abs()).max(1.0);

    let norm = |e: &[f64; N], a: &[f64; N], b: &[f64; N]| -> f64 {
        let sum: f64 = (0..N)
            .map(|i| {
                let sc = opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
                (e[i] / sc).powi(2)
            })
            .sum();
        (sum / N as f64).sqrt()
    };

    let mut s = s0;
    let mut x = x0;
    let mut k1 = st.f(s, &x)?;
    let mut h = match opts.h_init {
        Some(h) => h.abs().min(span),
        None => {
            let zero = [0.0; N];
            let d0 = norm(&x, &x, &zero).max(1e-300);
            let d1 = norm(&k1, &x, &zero).max(1e-300);
            (0.01 * d0 / d1).min(span).max(1e-10 * span)
        }
    };
    let mut gvals: Vec<f64> = events.iter().map(|e| (e.g)(t0, &x)).collect();
    let mut facold = 1e-4_f64;
    let mut steps = 0usize;
    let mut last_rejected = false;

    loop {
        if steps >= opts.max_steps {
            result.termination = Termination::MaxSteps;
            return Ok(result);
        }
        if h < h_min {
            result.termination = Termination::StepUnderflow { t: st.t_of(s) };
            return Ok(result);
        }
        let remaining = (s1 - s).abs();
        let last = h >= remaining;
        let hs = if last { remaining * dir } else { h * dir };
        steps += 1;

        let stage = (|| -> Result<_> {
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for i in 1..7 {
                let terms: Vec<(f64, &[f64; N])> = (0..i).map(|j| (A[i][j], &k[j])).collect();
                let xi = axpy(&x, hs, &terms);
                k[i] = st.f(s + C[i] * hs, &xi)?;
            }
            let terms: Vec<(f64, &[f64; N])> = (0..6).map(|j| (A[6][j], &k[j])).collect();
            let xn = axpy(&x, hs, &terms);
            Ok((k, xn))
        })();
        let (k, xn) = match stage {
            Ok(v) => v,
            Err(_) => {
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        let err_terms: Vec<(f64, &[f64; N])> = (0..7).map(|j| (E[j], &k[j])).collect();
        let evec = axpy(&[0.0; N], hs, &err_terms);
        let err = norm(&evec, &x, &xn);
        let fac11 = err.powf(0.17);
        if !err.is_finite() {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if err > 1.0 {
            h /= (fac11 / 0.9).min(5.0);
            last_rejected = true;
            continue;
        }

        // Accepted step: build the dense-output polynomial.
        let ydiff: [f64; N] = std::array::from_fn(|i| xn[i] - x[i]);
        let bspl: [f64; N] = std::array::from_fn(|i| hs * k[0][i] - ydiff[i]);
        let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - hs * k[6][i] - bspl[i]);
        let r5: [f64; N] = std::array::from_fn(|i| hs * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>());
        let seg = Segment { s0: s, h: hs, rcont: [x, ydiff, bspl, r4, r5] };
        let s_new = if last { s1 } else { s + hs };
        let t_new = st.t_of(s_new);

        // Event detection on the new step.
        let mut hit: Option<(f64, usize)> = None;
        let mut pending = Vec::new();
        for (ei, ev) in events.iter().enumerate() {
            let g1 = (ev.g)(t_new, &xn);
            let g0 = gvals[ei];
            if g0 != 0.0 && (g1 == 0.0 || g0.signum() != g1.signum()) && g1.is_finite() {
                let theta = locate(&seg, &st, ev, g0);
                let se = s + theta * hs;
                if ev.terminal {
                    if hit.is_none_or(|(th, _)| theta < th) {
                        hit = Some((theta, ei));
                    }
                } else {
                    pending.push((theta, EventRecord { kind: ev.kind, t: st.t_of(se) }));
                }
            }
            gvals[ei] = g1;
        }
        pending.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (theta, rec) in pending {
            if hit.is_none_or(|(th, _)| theta <= th) {
                result.events.push(rec);
            }
        }
        if let Some((theta, ei)) = hit {
            let se = s + theta * hs;
            let te = st.t_of(se);
            let xe = dense_eval(&seg, theta);
            result.segments.push(seg);
            result.samples.push((te, xe));
            result.events.push(EventRecord { kind: events[ei].kind, t: te });
            result.termination = Termination::Event(events[ei].kind);
            return Ok(result);
        }
        result.segments.push(seg);
        result.samples.push((t_new, xn));
        if last {
            return Ok(result);
        }
        s = s_new;
        x = xn;
        k1 = k[6];
        let mut fac = fac11 / facold.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let mut hn = h / fac;
        if last_rejected {
            hn = hn.min(h);
        }
        facold = err.max(1e-4);
        last_rejected = false;
        h = hn;
    }
}

/// Bisects the dense interpolant of one step for the sign change of `ev`.
fn locate<const N: usize, S: OdeSystem<N> + ?Sized>(
    seg: &Segment<N>,
    st: &Stepped<'_, N, S>,
    ev: &Event<'_, N>,
    g0: f64,
) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let t_at = |th: f64| st.t_of(seg.s0 + th * seg.h);
    for _ in 0..200 {
        let (tl, th) = (t_at(lo), t_at(hi));
        let tol = match st.abscissa {
            Abscissa::Linear => 1e-12,
            Abscissa::Log => 1e-12 * tl.abs().max(th.abs()),
        };
        if (th - tl).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = (ev.g)(t_at(mid), &dense_eval(seg, mid));
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == g0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// First zero of the sonic discriminant along a `(ρ, u)` trajectory.
pub fn detect_sonic(params: &GammaParams, result: &IntegrationResult<2>) -> Option<f64> {
    let d = |t: f64, x: &[f64; 2]| sonic_discriminant(params, t, State { rho: x[0], u: x[1] });
    for w in result.samples.windows(2) {
        let (ta, xa) = w[0];
        let (tb, xb) = w[1];
        let (da, db) = (d(ta, &xa), d(tb, &xb));
        if da == 0.0 {
            return Some(ta);
        }
        if da.signum() != db.signum() {
            let (mut lo, mut hi) = (ta, tb);
            let mut dlo = da;
            for _ in 0..200 {
                if (hi - lo).abs() <= 1e-13 * lo.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let dm = d(mid, &result.eval(mid)?);
                if dm.signum() == dlo.signum() {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
    }
    None
}
