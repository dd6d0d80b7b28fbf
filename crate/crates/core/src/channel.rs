//! Delay-Doppler channel realizations and the spectrum of the effective channel.
//!
//! With integer delay and Doppler taps the effective DD channel is a 2-D
//! circular convolution, so its matrix is doubly-block circulant and is
//! diagonalised by the symplectic Fourier pair. The eigenvalue at time slot
//! `n`, subcarrier `m` is
//!
//! ```text
//! lambda(n, m) = sum_w h_w * exp(j 2 pi (n k_w / N - m l_w / M))
//! ```
//!
//! which is exactly the per-bin gain seen after [`crate::modem::isfft`].
//! Phases are tracked as integers modulo `N * M` (`n k_w M - m l_w N`) so that
//! grouping of equal-modulus eigenvalues never depends on float comparisons.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FrameParams;

/// Eigenvalues with `|lambda|^2` below this fraction of the mean power count as zero.
pub const SINGULAR_REL_THRESHOLD: f64 = 1e-12;

/// Largest matrix order [`build_effective_matrix`] will assemble.
pub const DENSE_LIMIT: usize = 4096;

/// A link of the two-phase protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkId {
    /// Source to near user, phase 1.
    ScT1,
    /// Source to relay, phase 1.
    SrT1,
    /// Source to near user, phase 2.
    ScT2,
    /// Relay to near user, phase 2 (interference, cancelled at the near user).
    RcT2,
    /// Relay to far user, phase 2.
    ReT2,
}

impl LinkId {
    pub const ALL: [LinkId; 5] =
        [LinkId::ScT1, LinkId::SrT1, LinkId::ScT2, LinkId::RcT2, LinkId::ReT2];

    pub fn name(&self) -> &'static str {
        match self {
            LinkId::ScT1 => "sc_t1",
            LinkId::SrT1 => "sr_t1",
            LinkId::ScT2 => "sc_t2",
            LinkId::RcT2 => "rc_t2",
            LinkId::ReT2 => "re_t2",
        }
    }
}

/// One resolvable path: integer Doppler and delay taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathTap {
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub paths: Vec<PathTap>,
    /// Total average power over all paths.
    pub omega_total: f64,
    pub link: LinkId,
}

impl ChannelProfile {
    pub fn new(paths: Vec<PathTap>, omega_total: f64, link: LinkId) -> Result<Self> {
        let profile = Self { paths, omega_total, link };
        profile.check()?;
        Ok(profile)
    }

    /// Builds a profile from parallel Doppler and delay tap lists.
    pub fn from_taps(k: &[usize], l: &[usize], omega_total: f64, link: LinkId) -> Result<Self> {
        if k.len() != l.len() {
            return Err(Error::InvalidProfile(format!(
                "{} Doppler taps but {} delay taps",
                k.len(),
                l.len()
            )));
        }
        let paths = k.iter().zip(l).map(|(&k, &l)| PathTap { k, l }).collect();
        Self::new(paths, omega_total, link)
    }

    pub fn check(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::InvalidProfile("at least one path is required".into()));
        }
        if !(self.omega_total.is_finite() && self.omega_total > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "omega must be positive, got {}",
                self.omega_total
            )));
        }
        for (i, a) in self.paths.iter().enumerate() {
            if self.paths[..i].contains(a) {
                return Err(Error::InvalidProfile(format!(
                    "duplicate tap (k={}, l={})",
                    a.k, a.l
                )));
            }
        }
        Ok(())
    }

    /// Checks that every tap lies inside the frame's grid.
    pub fn check_frame(&self, frame: &FrameParams) -> Result<()> {
        for p in &self.paths {
            if p.k >= frame.n || p.l >= frame.m {
                return Err(Error::InvalidProfile(format!(
                    "tap (k={}, l={}) outside {}x{} grid",
                    p.k, p.l, frame.n, frame.m
                )));
            }
        }
        Ok(())
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Average power of each individual path (equal split).
    pub fn path_power(&self) -> f64 {
        self.omega_total / self.paths.len() as f64
    }
}

/// Drawn channel gains for one profile. The delay-Doppler phase rotation is
/// already folded into the gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub profile: ChannelProfile,
    pub gains: Vec<Complex64>,
}

/// Draws a circularly-symmetric complex Gaussian with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn draw_realization<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> ChannelRealization {
    let var = profile.path_power();
    let gains = profile.paths.iter().map(|_| complex_gaussian(rng, var)).collect();
    ChannelRealization { profile: profile.clone(), gains }
}

/// Eigenvalues of the effective DD channel, indexed `m * N + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub lambdas: Vec<Complex64>,
}

/// Partition of the grid into classes whose eigenvalues share one modulus
/// for every realization of the profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    /// Class sizes `C_1..C_G`.
    pub multiplicities: Vec<usize>,
    /// Class id of each grid point, indexed `m * N + n`.
    pub assignment: Vec<usize>,
    /// One grid point per class.
    pub representatives: Vec<usize>,
}

impl GroupStructure {
    pub fn num_groups(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Single-group structure for a grid of `size` points.
    pub fn single(size: usize) -> Self {
        Self { multiplicities: vec![size], assignment: vec![0; size], representatives: vec![0] }
    }
}

/// Integer phase of path `(k, l)` at grid point `(n, m)`, in units of `2 pi / (N M)`.
fn phase_index(n: usize, m: usize, tap: PathTap, frame: &FrameParams) -> usize {
    let size = frame.size();
    let fwd = (n * tap.k % frame.n) * frame.m;
    let back = (m * tap.l % frame.m) * frame.n;
    (fwd + size - back) % size
}

fn twiddles(size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|p| Complex64::from_polar(1.0, 2.0 * PI * p as f64 / size as f64))
        .collect()
}

/// Precomputed phase tables for evaluating many realizations of one profile.
#[derive(Debug, Clone)]
pub struct SpectrumPlan {
    size: usize,
    num_paths: usize,
    /// `phases[w * size + i]`: phase index of path `w` at grid point `i`.
    phases: Vec<usize>,
    twiddles: Vec<Complex64>,
    groups: GroupStructure,
}

impl SpectrumPlan {
    pub fn new(profile: &ChannelProfile, frame: &FrameParams) -> Result<Self> {
        profile.check()?;
        profile.check_frame(frame)?;
        let size = frame.size();
        let mut phases = Vec::with_capacity(size * profile.num_paths());
        for &tap in &profile.paths {
            for m in 0..frame.m {
                for n in 0..frame.n {
                    phases.push(phase_index(n, m, tap, frame));
                }
            }
        }
        let groups = groups_from_phases(&phases, size, profile.num_paths());
        Ok(Self { size, num_paths: profile.num_paths(), phases, twiddles: twiddles(size), groups })
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }

    #[inline]
    fn eigenvalue(&self, gains: &[Complex64], i: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, g) in gains.iter().enumerate() {
            acc += g * self.twiddles[self.phases[w * self.size + i]];
        }
        acc
    }

    pub fn spectrum(&self, gains: &[Complex64]) -> EigenSpectrum {
        debug_assert_eq!(gains.len(), self.num_paths);
        EigenSpectrum { lambdas: (0..self.size).map(|i| self.eigenvalue(gains, i)).collect() }
    }

    /// `sum_w |lambda_w|^-2`, evaluated on one representative per group.
    pub fn theta(&self, gains: &[Complex64]) -> f64 {
        debug_assert_eq!(gains.len(), self.num_paths);
        let g = &self.groups;
        let mut inv = 0.0;
        let mut power = 0.0;
        let mut min_sq = f64::INFINITY;
        for (&rep, &c) in g.representatives.iter().zip(&g.multiplicities) {
            let sq = self.eigenvalue(gains, rep).norm_sqr();
            min_sq = min_sq.min(sq);
            power += c as f64 * sq;
            inv += c as f64 / sq;
        }
        if min_sq < SINGULAR_REL_THRESHOLD * power / self.size as f64 || !inv.is_finite() {
            f64::INFINITY
        } else {
            inv
        }
    }
}

fn groups_from_phases(phases: &[usize], size: usize, num_paths: usize) -> GroupStructure {
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut multiplicities = Vec::new();
    let mut representatives = Vec::new();
    let mut assignment = Vec::with_capacity(size);
    for i in 0..size {
        let reference = phases[i];
        // Phase vector relative to the first path; a common rotation leaves |lambda| unchanged.
        let key: Vec<usize> = (1..num_paths)
            .map(|w| (phases[w * size + i] + size - reference) % size)
            .collect();
        let next = multiplicities.len();
        let id = *ids.entry(key).or_insert(next);
        if id == next {
            multiplicities.push(0);
            representatives.push(i);
        }
        multiplicities[id] += 1;
        assignment.push(id);
    }
    GroupStructure { multiplicities, assignment, representatives }
}

pub fn eigen_spectrum(real: &ChannelRealization, frame: &FrameParams) -> Result<EigenSpectrum> {
    Ok(SpectrumPlan::new(&real.profile, frame)?.spectrum(&real.gains))
}

pub fn group_structure(profile: &ChannelProfile, frame: &FrameParams) -> Result<GroupStructure> {
    Ok(SpectrumPlan::new(profile, frame)?.groups)
}

/// `sum_w |lambda_w|^-2`, or `+inf` when the spectrum is numerically singular.
pub fn theta(spec: &EigenSpectrum) -> f64 {
    let n = spec.lambdas.len();
    if n == 0 {
        return 0.0;
    }
    let power: f64 = spec.lambdas.iter().map(|l| l.norm_sqr()).sum();
    let floor = SINGULAR_REL_THRESHOLD * power / n as f64;
    let mut acc = 0.0;
    for l in &spec.lambdas {
        let sq = l.norm_sqr();
        if sq < floor || sq == 0.0 {
            return f64::INFINITY;
        }
        acc += 1.0 / sq;
    }
    acc
}

/// Dense row-major complex matrix, used only as an oracle on small grids.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub order: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.order + col]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.order);
        self.data.chunks(self.order).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Assembles the `NM x NM` effective channel matrix in `l * N + k` order.
pub fn build_effective_matrix(real: &ChannelRealization, frame: &FrameParams) -> Result<DenseMatrix> {
    let size = frame.size();
    if size > DENSE_LIMIT {
        return Err(Error::MatrixTooLarge { order: size, limit: DENSE_LIMIT });
    }
    real.profile.check_frame(frame)?;
    let (n, m) = (frame.n, frame.m);
    let mut data = vec![Complex64::new(0.0, 0.0); size * size];
    for l in 0..m {
        for k in 0..n {
            let row = l * n + k;
            for (tap, h) in real.profile.paths.iter().zip(&real.gains) {
                let kk = (k + n - tap.k % n) % n;
                let ll = (l + m - tap.l % m) % m;
                data[row * size + ll * n + kk] += h;
            }
        }
    }
    Ok(DenseMatrix { order: size, data })
}
