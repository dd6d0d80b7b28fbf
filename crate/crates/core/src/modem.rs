//! Delay-Doppler transmit/receive chain: ISFFT/SFFT, NOMA superposition,
//! channel application and eigen-domain zero-forcing.
//!
//! Normalisation: the ISFFT carries the `1/(NM)` factor and the SFFT carries
//! none, so `sfft(isfft(x)) == x`. Under this convention
//! `sum |X|^2 = sum |x|^2 / (NM)`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, ChannelRealization, EigenSpectrum, SINGULAR_REL_THRESHOLD};
use crate::error::{Error, Result};
use crate::frame::FrameParams;

/// Symbols on the delay-Doppler grid, `l * N + k` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DdGrid(pub Vec<Complex64>);

/// Symbols on the time-frequency grid, `m * N + n` order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfGrid(pub Vec<Complex64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub alpha_c: f64,
    pub alpha_e: f64,
}

impl PowerAllocation {
    pub fn new(alpha_c: f64, alpha_e: f64) -> Result<Self> {
        let a = Self { alpha_c, alpha_e };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<()> {
        let Self { alpha_c, alpha_e } = *self;
        let ordered = 0.0 < alpha_c && alpha_c < alpha_e && alpha_e < 1.0;
        if !ordered || (alpha_c + alpha_e - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidAllocation { alpha_c, alpha_e });
        }
        Ok(())
    }
}

/// Payload alphabet. Outage depends only on SINR, so this never changes a
/// measured outage probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constellation {
    #[default]
    Qpsk,
    Gaussian,
}

/// Unit-energy random payload of `len` symbols.
pub fn random_symbols<R: Rng + ?Sized>(rng: &mut R, len: usize, kind: Constellation) -> DdGrid {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let values = (0..len)
        .map(|_| match kind {
            Constellation::Qpsk => {
                let bits: u8 = rng.random_range(0..4);
                let re = if bits & 1 == 0 { a } else { -a };
                let im = if bits & 2 == 0 { a } else { -a };
                Complex64::new(re, im)
            }
            Constellation::Gaussian => complex_gaussian(rng, 1.0),
        })
        .collect();
    DdGrid(values)
}

/// Adds i.i.d. `CN(0, var)` noise in place.
pub fn add_noise<R: Rng + ?Sized>(y: &mut [Complex64], var: f64, rng: &mut R) {
    for v in y {
        *v += complex_gaussian(rng, var);
    }
}

/// Planned transforms for one frame size.
pub struct OtfsTransform {
    n: usize,
    m: usize,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
}

impl OtfsTransform {
    pub fn new(frame: &FrameParams) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n: frame.n,
            m: frame.m,
            fwd_n: planner.plan_fft_forward(frame.n),
            inv_n: planner.plan_fft_inverse(frame.n),
            fwd_m: planner.plan_fft_forward(frame.m),
            inv_m: planner.plan_fft_inverse(frame.m),
        }
    }

    fn size(&self) -> usize {
        self.n * self.m
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::SizeMismatch { expected: self.size(), got: len });
        }
        Ok(())
    }

    /// Runs `along_n` over each contiguous length-N run, then `along_m` over each stride-N column.
    fn separable(&self, data: &mut [Complex64], along_n: &dyn Fft<f64>, along_m: &dyn Fft<f64>) {
        let (n, m) = (self.n, self.m);
        for row in data.chunks_mut(n) {
            along_n.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..n {
            for (j, c) in col.iter_mut().enumerate() {
                *c = data[j * n + i];
            }
            along_m.process(&mut col);
            for (j, c) in col.iter().enumerate() {
                data[j * n + i] = *c;
            }
        }
    }

    /// `X[n,m] = 1/(NM) sum_{k,l} x[k,l] exp(j 2 pi (nk/N - ml/M))`
    pub fn isfft(&self, dd: &DdGrid) -> Result<TfGrid> {
        self.check_len(dd.0.len())?;
        let mut data = dd.0.clone();
        self.separable(&mut data, self.inv_n.as_ref(), self.fwd_m.as_ref());
        let scale = 1.0 / self.size() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        Ok(TfGrid(data))
    }

    /// `x[k,l] = sum_{n,m} X[n,m] exp(-j 2 pi (nk/N - ml/M))`
    pub fn sfft(&self, tf: &TfGrid) -> Result<DdGrid> {
        self.check_len(tf.0.len())?;
        let mut data = tf.0.clone();
        self.separable(&mut data, self.fwd_n.as_ref(), self.inv_m.as_ref());
        Ok(DdGrid(data))
    }

    /// Zero-forcing by division in the eigen domain.
    pub fn zf_equalize(&self, y: &[Complex64], spec: &EigenSpectrum) -> Result<Vec<Complex64>> {
        self.check_len(y.len())?;
        self.check_len(spec.lambdas.len())?;
        let power: f64 = spec.lambdas.iter().map(|l| l.norm_sqr()).sum::<f64>() / y.len() as f64;
        if spec.lambdas.iter().any(|l| l.norm_sqr() < SINGULAR_REL_THRESHOLD * power || l.norm_sqr() == 0.0)
        {
            return Err(Error::SingularChannel);
        }
        let mut tf = self.isfft(&DdGrid(y.to_vec()))?;
        for (v, l) in tf.0.iter_mut().zip(&spec.lambdas) {
            *v /= l;
        }
        Ok(self.sfft(&tf)?.0)
    }
}

pub fn isfft(dd: &DdGrid, frame: &FrameParams) -> Result<TfGrid> {
    OtfsTransform::new(frame).isfft(dd)
}

pub fn sfft(tf: &TfGrid, frame: &FrameParams) -> Result<DdGrid> {
    OtfsTransform::new(frame).sfft(tf)
}

pub fn zf_equalize(y: &[Complex64], spec: &EigenSpectrum, frame: &FrameParams) -> Result<Vec<Complex64>> {
    OtfsTransform::new(frame).zf_equalize(y, spec)
}

/// `sqrt(alpha_c) x_c + sqrt(alpha_e) x_e`, elementwise.
pub fn superpose(x_c: &DdGrid, x_e: &DdGrid, alloc: &PowerAllocation) -> Result<DdGrid> {
    alloc.check()?;
    if x_c.0.len() != x_e.0.len() {
        return Err(Error::SizeMismatch { expected: x_c.0.len(), got: x_e.0.len() });
    }
    let (sc, se) = (alloc.alpha_c.sqrt(), alloc.alpha_e.sqrt());
    Ok(DdGrid(x_c.0.iter().zip(&x_e.0).map(|(c, e)| c * sc + e * se).collect()))
}

/// `y[k,l] = sum_w h_w x[(k - k_w) mod N, (l - l_w) mod M]`; noise is the caller's job.
pub fn apply_dd_channel(real: &ChannelRealization, x: &DdGrid, frame: &FrameParams) -> Result<DdGrid> {
    let size = frame.size();
    if x.0.len() != size {
        return Err(Error::SizeMismatch { expected: size, got: x.0.len() });
    }
    real.profile.check_frame(frame)?;
    let (n, m) = (frame.n, frame.m);
    let mut y = vec![Complex64::new(0.0, 0.0); size];
    for (tap, h) in real.profile.paths.iter().zip(&real.gains) {
        for l in 0..m {
            let src_l = (l + m - tap.l) % m;
            for k in 0..n {
                let src_k = (k + n - tap.k) % n;
                y[l * n + k] += h * x.0[src_l * n + src_k];
            }
        }
    }
    Ok(DdGrid(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, eigen_spectrum, ChannelProfile, LinkId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(m: usize, n: usize) -> FrameParams {
        FrameParams::new(m, n, 15e3, 4e9).unwrap()
    }

    fn random_grid(rng: &mut ChaCha8Rng, len: usize) -> DdGrid {
        random_symbols(rng, len, Constellation::Gaussian)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_grid_maps_to_dc() {
        let f = frame(8, 4);
        let x = DdGrid(vec![Complex64::new(1.0, 0.0); 32]);
        let tf = isfft(&x, &f).unwrap();
        assert!((tf.0[0] - 1.0).norm() < 1e-15);
        assert!(tf.0[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn parseval_under_isfft_scaling() {
        let f = frame(8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_grid(&mut rng, 64);
        let tf = isfft(&x, &f).unwrap();
        let ex: f64 = x.0.iter().map(|v| v.norm_sqr()).sum();
        let et: f64 = tf.0.iter().map(|v| v.norm_sqr()).sum();
        assert!((et - ex / 64.0).abs() < 1e-12 * ex);
    }

    #[test]
    fn single_tone_maps_to_single_bin() {
        let (m, n) = (8, 4);
        let f = frame(m, n);
        let (k0, l0) = (3, 5);
        // X[n,m] = exp(j2pi(n k0/N - m l0/M)) is the ISFFT of NM * delta(k0, l0)
        let tf: Vec<Complex64> = (0..m)
            .flat_map(|mm| {
                (0..n).map(move |nn| {
                    let ph = 2.0 * std::f64::consts::PI
                        * (nn as f64 * k0 as f64 / n as f64 - mm as f64 * l0 as f64 / m as f64);
                    Complex64::from_polar(1.0, ph)
                })
            })
            .collect();
        let dd = sfft(&TfGrid(tf), &f).unwrap();
        for (i, v) in dd.0.iter().enumerate() {
            let want = if i == l0 * n + k0 { 32.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-12, "bin {i}: {v}");
        }
    }

    #[test]
    fn sfft_is_linear() {
        let f = frame(4, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = TfGrid(random_grid(&mut rng, 32).0);
        let y = TfGrid(random_grid(&mut rng, 32).0);
        let (a, b) = (Complex64::new(0.3, -2.0), Complex64::new(-1.1, 0.4));
        let mix = TfGrid(x.0.iter().zip(&y.0).map(|(p, q)| a * p + b * q).collect());
        let lhs = sfft(&mix, &f).unwrap();
        let (sx, sy) = (sfft(&x, &f).unwrap(), sfft(&y, &f).unwrap());
        let rhs: Vec<Complex64> = sx.0.iter().zip(&sy.0).map(|(p, q)| a * p + b * q).collect();
        assert!(max_diff(&lhs.0, &rhs) < 1e-12);
    }

    #[test]
    fn superpose_example_and_errors() {
        let alloc = PowerAllocation::new(0.1, 0.9).unwrap();
        let one = DdGrid(vec![Complex64::new(1.0, 0.0)]);
        let s = superpose(&one, &one, &alloc).unwrap();
        assert!((s.0[0].re - (0.1f64.sqrt() + 0.9f64.sqrt())).abs() < 1e-15);
        assert!((s.0[0].re - 1.2649).abs() < 1e-4);
        assert!(PowerAllocation::new(0.0, 1.0).is_err());
        assert!(PowerAllocation::new(0.6, 0.4).is_err());
        assert!(PowerAllocation::new(0.1, 0.8).is_err());
        let two = DdGrid(vec![Complex64::new(1.0, 0.0); 2]);
        assert!(superpose(&one, &two, &alloc).is_err());
    }

    #[test]
    fn superposed_energy_is_unit() {
        let alloc = PowerAllocation::new(0.1, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let xc = random_symbols(&mut rng, n, Constellation::Qpsk);
        let xe = random_symbols(&mut rng, n, Constellation::Qpsk);
        let s = superpose(&xc, &xe, &alloc).unwrap();
        let e: f64 = s.0.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((e - 1.0).abs() < 0.01, "energy {e}");
    }

    #[test]
    fn identity_channel_passes_through() {
        let f = frame(4, 4);
        let p = ChannelProfile::from_taps(&[0], &[0], 1.0, LinkId::ScT1).unwrap();
        let r = ChannelRealization { profile: p, gains: vec![Complex64::new(1.0, 0.0)] };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_grid(&mut rng, 16);
        assert_eq!(apply_dd_channel(&r, &x, &f).unwrap(), x);
        let spec = eigen_spectrum(&r, &f).unwrap();
        assert!(max_diff(&zf_equalize(&x.0, &spec, &f).unwrap(), &x.0) < 1e-14);
    }

    #[test]
    fn channel_commutes_with_circular_shift() {
        let (m, n) = (6, 4);
        let f = frame(m, n);
        let p = ChannelProfile::from_taps(&[0, 1, 3], &[0, 2, 5], 1.0, LinkId::ScT1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = draw_realization(&p, &mut rng);
        let x = random_grid(&mut rng, m * n);
        let shift = |g: &DdGrid, a: usize, b: usize| {
            let mut out = vec![Complex64::new(0.0, 0.0); m * n];
            for l in 0..m {
                for k in 0..n {
                    out[((l + b) % m) * n + (k + a) % n] = g.0[l * n + k];
                }
            }
            DdGrid(out)
        };
        let lhs = apply_dd_channel(&r, &shift(&x, 1, 4), &f).unwrap();
        let rhs = shift(&apply_dd_channel(&r, &x, &f).unwrap(), 1, 4);
        assert!(max_diff(&lhs.0, &rhs.0) < 1e-14);
    }

    #[test]
    fn zf_rejects_singular_spectrum() {
        let f = frame(2, 2);
        let spec = EigenSpectrum {
            lambdas: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        let y = vec![Complex64::new(1.0, 0.0); 4];
        assert_eq!(zf_equalize(&y, &spec, &f), Err(Error::SingularChannel));
    }

    #[test]
    fn size_mismatch_is_reported() {
        let f = frame(4, 4);
        assert!(matches!(isfft(&DdGrid(vec![Complex64::new(0.0, 0.0); 15]), &f), Err(Error::SizeMismatch { .. })));
    }
}
