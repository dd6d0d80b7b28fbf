//! Modified Bessel function of the second kind, order one, complex argument.
//!
//! Power series for `|z| <= 2`, Steed's continued fraction (CF2, Temme's
//! normalisation) above that. Valid on the closed right half-plane minus the
//! origin.

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const SERIES_RADIUS: f64 = 2.0;

pub fn bessel_k1(z: Complex64) -> Result<Complex64> {
    if z.re < 0.0 || z == Complex64::new(0.0, 0.0) || !z.is_finite() {
        return Err(Error::BesselDomain { re: z.re, im: z.im });
    }
    if z.norm() <= SERIES_RADIUS {
        Ok(series(z))
    } else {
        Ok(continued_fraction(z))
    }
}

/// `K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1) + psi(k+2)] (z^2/4)^k / (k! (k+1)!)`
fn series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0); // (z^2/4)^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1_sum = Complex64::new(0.0, 0.0);
    let mut psi_sum = Complex64::new(0.0, 0.0);
    for k in 0..200 {
        i1_sum += term;
        let d = term * (psi_k1 + psi_k2);
        psi_sum += d;
        if term.norm() < EPS * i1_sum.norm() && d.norm() < EPS * psi_sum.norm() {
            break;
        }
        let kf = k as f64;
        term = term * q / ((kf + 1.0) * (kf + 2.0));
        psi_k1 += 1.0 / (kf + 1.0);
        psi_k2 += 1.0 / (kf + 2.0);
    }
    let i1 = z * 0.5 * i1_sum;
    z.inv() + (z * 0.5).ln() * i1 - z * 0.25 * psi_sum
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..MAX_ITER {
        a -= 2.0 * (i - 1) as f64;
        c = -c * a / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - one) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < EPS * s.norm() {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (z * 2.0)).sqrt() * (-z).exp() / s;
    k0 * (z + 0.5 - h) / z
}
