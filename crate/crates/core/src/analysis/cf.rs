//! Characteristic function of `Theta = sum_g C_g / E_g` with the `E_g`
//! independent exponentials of mean `Omega`.
//!
//! For one inverse-exponential term the CF is
//! `psi(t, Omega) = z K1(z)`, `z = 2 sqrt(-j t Omega) / Omega`.

use num_complex::Complex64;

use super::bessel::bessel_k1;
use crate::channel::GroupStructure;
use crate::error::{Error, Result};

/// `z` beyond which `|z K1(z)|` underflows.
const UNDERFLOW_RE: f64 = 740.0;

pub fn psi(t: f64, omega: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if t < 0.0 {
        return psi(-t, omega).conj();
    }
    let z = Complex64::new(0.0, -t * omega).sqrt() * (2.0 / omega);
    if z.re > UNDERFLOW_RE {
        return Complex64::new(0.0, 0.0);
    }
    match bessel_k1(z) {
        Ok(k) => z * k,
        // z underflowed to zero: the CF is 1 to working precision
        Err(_) => Complex64::new(1.0, 0.0),
    }
}

/// Group multiplicities and link power defining the CF of `Theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfSpec {
    multiplicities: Vec<usize>,
    omega: f64,
    /// `(C, how many groups share it)`, so equal multiplicities cost one Bessel call.
    classes: Vec<(usize, i32)>,
}

impl CfSpec {
    pub fn new(multiplicities: Vec<usize>, omega: f64) -> Result<Self> {
        if multiplicities.is_empty() || multiplicities.contains(&0) {
            return Err(Error::InvalidProfile("multiplicities must be non-empty and positive".into()));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidProfile(format!("omega must be positive, got {omega}")));
        }
        let mut sorted = multiplicities.clone();
        sorted.sort_unstable();
        let mut classes: Vec<(usize, i32)> = Vec::new();
        for c in sorted {
            match classes.last_mut() {
                Some((v, n)) if *v == c => *n += 1,
                _ => classes.push((c, 1)),
            }
        }
        Ok(Self { multiplicities, omega, classes })
    }

    pub fn from_groups(groups: &GroupStructure, omega: f64) -> Result<Self> {
        Self::new(groups.multiplicities.clone(), omega)
    }

    /// Single group of size `nm`.
    pub fn single(nm: usize, omega: f64) -> Result<Self> {
        Self::new(vec![nm], omega)
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn num_groups(&self) -> usize {
        self.multiplicities.len()
    }

    /// `sum C`, the grid size.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Scale of the `1/x` tail of `Theta`: `P(Theta > x) ~ tail_scale / x`.
    pub fn tail_scale(&self) -> f64 {
        self.total() as f64 / self.omega
    }
}

/// Products below this modulus are returned as 0 without evaluating K1.
const NEGLIGIBLE_LN: f64 = -70.0;

/// Upper bound on `ln |psi(t, Omega)|` from `|z K1(z)| <= 1.5 sqrt(pi |z| / 2) exp(-Re z)`
/// for `|z| >= 2` on the ray `arg z = -pi/4`; 0 closer to the origin.
fn psi_ln_bound(t: f64, omega: f64) -> f64 {
    let r = 2.0 * (t.abs() / omega).sqrt();
    if r < 2.0 {
        return 0.0;
    }
    (1.5 * (std::f64::consts::FRAC_PI_2 * r).sqrt()).ln() - r * std::f64::consts::FRAC_1_SQRT_2
}

/// `prod_g psi(C_g t, Omega)`.
pub fn cf_theta(t: f64, spec: &CfSpec) -> Complex64 {
    let bound: f64 =
        spec.classes.iter().map(|&(c, count)| count as f64 * psi_ln_bound(c as f64 * t, spec.omega)).sum();
    if bound < NEGLIGIBLE_LN {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for &(c, count) in &spec.classes {
        let f = psi(c as f64 * t, spec.omega);
        acc *= if count == 1 { f } else { f.powi(count) };
        if acc.norm() == 0.0 {
            break;
        }
    }
    acc
}
