//! Closed-form choice of the adjustment parameter `mu`, the rounding
//! parameter `rho`, and the resulting approximation ratio.
//!
//! With `X = (1 - 2mu)/(mu(1 - mu))`, `Y = 1/(1 - mu)` and `m = max(1, X)`,
//! every analysed variant bounds the makespan by
//! `m * C(p') + d * Y * A(p')`. For the general allocator
//! `C(p') <= L/rho` and `A(p') <= L/(1 - rho)`, giving `m/rho + dY/(1 - rho)`
//! (`f_d` when `m = 1`, `g_d` when `m = X`), minimized at
//! `rho = sqrt(m) / (sqrt(m) + sqrt(dY))` with value `(sqrt(m) + sqrt(dY))^2`.
//! For SP graphs and independent jobs `C(p')` and `A(p')` are both within
//! `(1 + eps) L`, giving `(1 + eps)(m + dY)`.
//!
//! Irrational choices of `mu` are stored as a rational that is never below
//! the true value, so `P^min >= 1/mu^2` checks stay valid.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{ceil_u64, from_f64, int, ratio, to_f64, Rational};

pub const PHI: f64 = 1.618_033_988_749_895;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphClass {
    General,
    SeriesParallel,
    Independent,
}

impl GraphClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphClass::General => "general",
            GraphClass::SeriesParallel => "sp",
            GraphClass::Independent => "independent",
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(GraphClass::General),
            "sp" | "tree" => Ok(GraphClass::SeriesParallel),
            "independent" => Ok(GraphClass::Independent),
            _ => Err(Error::Config(format!("unknown graph class {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamChoice {
    pub d: usize,
    pub graph_class: GraphClass,
    pub mu: Rational,
    /// Only the general allocator rounds.
    pub rho: Option<Rational>,
    /// Only the SP allocator is approximate.
    pub epsilon: Option<Rational>,
    pub guaranteed_ratio: f64,
    /// Smallest `P^min` with `P^min * mu^2 >= 1`.
    pub required_pmin: u64,
}

impl ParamChoice {
    pub fn mu_f64(&self) -> f64 {
        to_f64(&self.mu)
    }

    pub fn rho_f64(&self) -> Option<f64> {
        self.rho.as_ref().map(to_f64)
    }
}

/// `f_d`, `g_d` and `h_d` evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectiveValues {
    pub f: Rational,
    pub g: Rational,
    pub h: Rational,
}

pub fn objective_values(d: usize, mu: &Rational, rho: &Rational) -> Result<ObjectiveValues> {
    check_mu(mu)?;
    if *rho <= Rational::zero() || *rho >= Rational::one() {
        return Err(Error::Config("rho must lie in (0, 1)".into()));
    }
    let one = Rational::one();
    let dd = int(d as i64);
    let area = &dd / ((&one - mu) * (&one - rho));
    let x = x_of(mu);
    Ok(ObjectiveValues {
        f: &one / rho + &area,
        g: x / rho + area,
        h: h_value(d, mu),
    })
}

/// `h_d(mu) = (2d+4)mu^4 - (d+8)mu^3 + 8mu^2 - 4mu + 1`.
pub fn h_value(d: usize, mu: &Rational) -> Rational {
    let d = d as i64;
    let mu2 = mu * mu;
    let mu3 = &mu2 * mu;
    let mu4 = &mu3 * mu;
    int(2 * d + 4) * mu4 - int(d + 8) * mu3 + int(8) * mu2 - int(4) * mu + int(1)
}

/// `(1 - 2mu) / (mu (1 - mu))`.
pub fn x_of(mu: &Rational) -> Rational {
    let one = Rational::one();
    (&one - int(2) * mu) / (mu * (&one - mu))
}

fn check_mu(mu: &Rational) -> Result<()> {
    if *mu <= Rational::zero() || *mu >= ratio(1, 2) {
        return Err(Error::Config("mu must lie in (0, 1/2)".into()));
    }
    Ok(())
}

/// Smallest rational `>= v` among `f64` values for which `ok` holds,
/// starting from `v`.
fn bump_up(mut v: f64, ok: impl Fn(&Rational) -> bool) -> Rational {
    loop {
        let r = from_f64(v).expect("finite");
        if ok(&r) {
            return r;
        }
        v = v.next_up();
    }
}

/// `1 - 1/phi = (3 - sqrt 5)/2`, rounded up.
pub fn mu_golden() -> Rational {
    let one = Rational::one();
    // mu >= true value iff (1 - mu)^2 <= mu on (0, 1/2).
    bump_up((3.0 - 5f64.sqrt()) / 2.0, |m| (&one - m) * (&one - m) <= *m)
}

/// `1/(sqrt(d - 1) + 1)`, rounded up. Requires `d >= 2`.
pub fn mu_sqrt(d: usize) -> Rational {
    let one = Rational::one();
    let dm1 = int(d as i64 - 1);
    // mu >= true value iff 1/mu - 1 <= sqrt(d - 1).
    bump_up(1.0 / (((d - 1) as f64).sqrt() + 1.0), |m| {
        let s = &one / m - &one;
        &s * &s <= dm1
    })
}

/// Root of `h_d` in `(0, 3/8]` by exact bisection down to width `1e-9`.
/// Returns the upper bracket end, which is never below the root.
/// Requires `d >= 22` (otherwise `h_d(3/8) > 0` and no root is bracketed).
pub fn h_root(d: usize) -> Result<Rational> {
    let mut lo = Rational::zero();
    let mut hi = ratio(3, 8);
    if h_value(d, &hi) > Rational::zero() {
        return Err(Error::Config(format!(
            "h_d has no root in (0, 3/8] for d = {d}"
        )));
    }
    let width = ratio(1, 1_000_000_000);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / int(2);
        let h = h_value(d, &mid);
        if h.is_zero() {
            return Ok(mid);
        }
        if h > Rational::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Ratio bound `m/rho + dY/(1 - rho)` for the general allocator.
pub fn general_ratio(d: usize, mu: f64, rho: f64) -> f64 {
    let m = 1f64.max(x_f64(mu));
    m / rho + d as f64 / ((1.0 - mu) * (1.0 - rho))
}

/// Ratio-minimizing `rho` for a fixed `mu`.
pub fn best_rho(d: usize, mu: f64) -> f64 {
    let m = 1f64.max(x_f64(mu)).sqrt();
    m / (m + (d as f64 / (1.0 - mu)).sqrt())
}

/// Ratio bound `(1 + eps)(m + dY)` when `C(p')` and `A(p')` are both near-optimal.
pub fn special_ratio(d: usize, mu: f64, epsilon: f64) -> f64 {
    (1.0 + epsilon) * (1f64.max(x_f64(mu)) + d as f64 / (1.0 - mu))
}

fn x_f64(mu: f64) -> f64 {
    (1.0 - 2.0 * mu) / (mu * (1.0 - mu))
}

/// `phi d + 2 sqrt(phi d) + 1`.
pub fn golden_ratio_bound(d: usize) -> f64 {
    let pd = PHI * d as f64;
    pd + 2.0 * pd.sqrt() + 1.0
}

/// `1.619 d + 2.545 sqrt(d) + 1`.
pub fn rounded_ratio(d: usize) -> f64 {
    1.619 * d as f64 + 2.545 * (d as f64).sqrt() + 1.0
}

/// Large-`d` ratio estimate obtained from `mu ~ d^(-1/3)`.
pub fn estimated_ratio(d: usize) -> f64 {
    let d = d as f64;
    let c = d.cbrt();
    (d * c + 2.0 * d * (1.0 - 2.0 / c).sqrt() + c * c - 2.0 * c) / (c - 1.0)
}

/// `(sqrt X + sqrt(dY))^2` at the numerically solved `h_d` root (`d >= 22`).
pub fn actual_ratio(d: usize) -> Result<f64> {
    let mu = to_f64(&h_root(d)?);
    Ok(general_ratio(d, mu, best_rho(d, mu)))
}

fn pmin_for(mu: &Rational) -> u64 {
    ceil_u64(&(Rational::one() / (mu * mu)))
}

/// Defaults with `eps = 1/10` for the SP class.
pub fn select_parameters(d: usize, class: GraphClass) -> Result<ParamChoice> {
    select_parameters_with_epsilon(d, class, ratio(1, 10))
}

pub fn select_parameters_with_epsilon(
    d: usize,
    class: GraphClass,
    epsilon: Rational,
) -> Result<ParamChoice> {
    if d == 0 {
        return Err(Error::Config("d must be at least 1".into()));
    }
    if epsilon < Rational::zero() {
        return Err(Error::Config("epsilon must be non-negative".into()));
    }
    let mu = match class {
        GraphClass::General if d >= 22 => h_root(d)?,
        GraphClass::General => mu_golden(),
        _ if d >= 4 => mu_sqrt(d),
        _ => mu_golden(),
    };
    build(d, class, mu, None, epsilon)
}

/// Parameters with optional user overrides. Missing values fall back to the
/// defaults for `(d, class)`; a missing `rho` with an explicit `mu` uses the
/// ratio-minimizing `rho` for that `mu`.
pub fn parameters_with_overrides(
    d: usize,
    class: GraphClass,
    mu: Option<Rational>,
    rho: Option<Rational>,
    epsilon: Option<Rational>,
) -> Result<ParamChoice> {
    let epsilon = epsilon.unwrap_or_else(|| ratio(1, 10));
    let base = select_parameters_with_epsilon(d, class, epsilon.clone())?;
    let mu = mu.unwrap_or(base.mu);
    build(d, class, mu, rho, epsilon)
}

fn build(
    d: usize,
    class: GraphClass,
    mu: Rational,
    rho: Option<Rational>,
    epsilon: Rational,
) -> Result<ParamChoice> {
    check_mu(&mu)?;
    let mu_f = to_f64(&mu);
    let (rho, epsilon, guaranteed_ratio) = match class {
        GraphClass::General => {
            let rho = match rho {
                Some(r) => r,
                None => from_f64(best_rho(d, mu_f)).expect("finite"),
            };
            if rho <= Rational::zero() || rho >= Rational::one() {
                return Err(Error::Config("rho must lie in (0, 1)".into()));
            }
            let ratio = general_ratio(d, mu_f, to_f64(&rho));
            (Some(rho), None, ratio)
        }
        GraphClass::SeriesParallel => {
            let ratio = special_ratio(d, mu_f, to_f64(&epsilon));
            (None, Some(epsilon), ratio)
        }
        GraphClass::Independent => (None, None, special_ratio(d, mu_f, 0.0)),
    };
    Ok(ParamChoice {
        d,
        graph_class: class,
        required_pmin: pmin_for(&mu),
        mu,
        rho,
        epsilon,
        guaranteed_ratio,
    })
}
