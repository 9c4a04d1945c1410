//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Permanent by direct summation over all `n!` permutations.
pub fn brute_permanent(a: &Mat) -> Complex64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(a, &mut perm, 0, &mut total);
    total
}

fn permute(a: &Mat, perm: &mut Vec<usize>, k: usize, total: &mut Complex64) {
    let n = perm.len();
    if k == n {
        *total += (0..n).map(|i| a[i][perm[i]]).product::<Complex64>();
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(a, perm, k + 1, total);
        perm.swap(k, i);
    }
}

/// Parameters of a one-dimensional chain, written out independently of the
/// library's spec type.
#[derive(Clone, Copy, Debug)]
pub enum Chain {
    Static { sites: usize, hopping: f64, field: f64 },
    Driven { sites: usize, hopping: f64, amplitude: f64, omega: f64 },
    Aah { sites: usize, hopping: f64, lambda: f64, alpha: f64, phase: f64 },
}

impl Chain {
    pub fn sites(&self) -> usize {
        match *self {
            Chain::Static { sites, .. } | Chain::Driven { sites, .. } | Chain::Aah { sites, .. } => sites,
        }
    }

    fn hopping(&self) -> f64 {
        match *self {
            Chain::Static { hopping, .. } | Chain::Driven { hopping, .. } | Chain::Aah { hopping, .. } => hopping,
        }
    }

    fn onsite(&self, j: usize, t: f64) -> f64 {
        let c = (self.sites() as f64 - 1.0) / 2.0;
        let x = j as f64 - c;
        match *self {
            Chain::Static { field, .. } => field * x,
            Chain::Driven { amplitude, omega, .. } => amplitude * (omega * t).cos() * x,
            Chain::Aah { lambda, alpha, phase, .. } => {
                lambda * (2.0 * std::f64::consts::PI * alpha * (j as f64 + 1.0) + phase).cos()
            }
        }
    }

    /// `H(t)ψ` without forming the matrix.
    pub fn apply(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let m = psi.len();
        let j = self.hopping();
        (0..m)
            .map(|i| {
                let mut v = psi[i] * self.onsite(i, t);
                if i > 0 {
                    v -= psi[i - 1] * j;
                }
                if i + 1 < m {
                    v -= psi[i + 1] * j;
                }
                v
            })
            .collect()
    }
}

/// `exp(−i H(t_h) dt) ψ` by a Taylor series with sub-stepping.
pub fn taylor_step(chain: &Chain, psi: &[Complex64], t_h: f64, dt: f64) -> Vec<Complex64> {
    let sub = ((dt.abs() * 8.0).ceil() as usize).max(1);
    let h = dt / sub as f64;
    let mut out = psi.to_vec();
    for _ in 0..sub {
        let mut term = out.clone();
        let mut acc = out.clone();
        for n in 1..60 {
            let hv = chain.apply(&term, t_h);
            term = hv.iter().map(|x| -I * h * x / n as f64).collect();
            let size: f64 = term.iter().map(|x| x.norm_sqr()).sum();
            for (a, x) in acc.iter_mut().zip(&term) {
                *a += x;
            }
            if size < 1e-36 {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Site populations at every grid point, starting from site `start`.
///
/// A static chain is propagated in sub-steps of the exact evolution; a
/// driven chain uses one midpoint-frozen exponential per grid interval.
pub fn state_vector_populations(chain: &Chain, start: usize, t_end: f64, steps: usize) -> Vec<Vec<f64>> {
    let m = chain.sites();
    let mut psi = vec![Complex64::new(0.0, 0.0); m];
    psi[start] = Complex64::new(1.0, 0.0);
    let dt = t_end / steps as f64;
    let mut out = vec![psi.iter().map(|x| x.norm_sqr()).collect::<Vec<f64>>()];
    for k in 0..steps {
        psi = taylor_step(chain, &psi, k as f64 * dt + 0.5 * dt, dt);
        out.push(psi.iter().map(|x| x.norm_sqr()).collect());
    }
    out
}

/// Mean squared displacement `Σ i²P_i − (Σ iP_i)²`.
pub fn msd(p: &[f64]) -> f64 {
    let mean: f64 = p.iter().enumerate().map(|(i, x)| i as f64 * x).sum();
    let sq: f64 = p.iter().enumerate().map(|(i, x)| (i * i) as f64 * x).sum();
    sq - mean * mean
}

/// Dense `n×n` matrix with entries uniform in the unit square.
pub fn random_matrix(n: usize, next: &mut impl FnMut() -> f64) -> Mat {
    (0..n)
        .map(|_| (0..n).map(|_| Complex64::new(2.0 * next() - 1.0, 2.0 * next() - 1.0)).collect())
        .collect()
}
