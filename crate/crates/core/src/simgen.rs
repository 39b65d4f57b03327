//! Seeded generators for the simulation designs.
//!
//! Examples 1-3: `y_t = b k_t + a w_t + e_t` with `a, b ~ U(0,1)`, `k_t`
//! AR(1) with coefficient 0.8, `e ~ N(0, 0.2^2)` and `w_t` i.i.d. N(0,1),
//! AR(1) 0.05 or AR(1) 0.2 respectively.
//!
//! Example 4: `y_t = a + b k_t + e_t` with `a ~ N(0,1)`, `b` a random unit
//! vector, `k_t` AR(1) 0.7 and standard normal errors.
//!
//! Examples 5-6: the first `round(dP)` rows follow `b k_t + e_t` and the
//! rest `a w_t + e_t`, with i.i.d. `w_t`. Example 5 uses AR 0.8, error sd
//! 0.2 and `w` sd 1.5; example 6 uses AR 0.7, error sd 0.5 and `w` sd 3.
//!
//! All AR(1) series have unit-variance innovations and start from their
//! stationary distribution. Each component draws from its own ChaCha8
//! stream of the seed, so changing one component's design leaves the other
//! draws unchanged.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub example: u8,
    pub p: usize,
    pub t: usize,
    /// Fraction of rows in the dependent block (examples 5 and 6 only);
    /// defaults to 0.5 for example 5 and 0.4 for example 6.
    #[serde(default)]
    pub d: Option<f64>,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(example: u8, p: usize, t: usize, seed: u64) -> Self {
        Self {
            example,
            p,
            t,
            d: None,
            seed,
        }
    }

    /// Number of rows in the dependent block for examples 5 and 6.
    pub fn dependent_count(&self) -> Result<Option<usize>> {
        let d = match (self.example, self.d) {
            (5, None) => 0.5,
            (6, None) => 0.4,
            (5 | 6, Some(d)) => d,
            (_, Some(_)) => {
                return Err(Error::InvalidSpec(format!(
                    "d is only used by examples 5 and 6, not example {}",
                    self.example
                )))
            }
            _ => return Ok(None),
        };
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidSpec(format!("d must lie in (0, 1), got {d}")));
        }
        let n = (d * self.p as f64).round() as usize;
        if n == 0 || n >= self.p {
            return Err(Error::InvalidSpec(format!(
                "d = {d} with P = {} leaves an empty block",
                self.p
            )));
        }
        Ok(Some(n))
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.example) {
            return Err(Error::InvalidSpec(format!(
                "example must be between 1 and 6, got {}",
                self.example
            )));
        }
        if self.p < 2 {
            return Err(Error::InvalidSpec(format!("P must be at least 2, got {}", self.p)));
        }
        if self.t < 10 {
            return Err(Error::InvalidSpec(format!("T must be at least 10, got {}", self.t)));
        }
        self.dependent_count().map(|_| ())
    }
}

/// Generated panel with the components it was built from. Serializes
/// without the panel itself, as the ground-truth sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutput {
    pub spec: DgpSpec,
    #[serde(skip)]
    pub panel: Panel,
    /// P x m; column 0 loads `k_t`, column 1 (if present) loads `w_t`.
    pub loadings: DMatrix<f64>,
    /// m x T.
    pub factors: DMatrix<f64>,
    /// Constant mean vector (nonzero only for example 4).
    pub intercept: DVector<f64>,
    pub errors: DMatrix<f64>,
    /// Row indices of the dependent and independent blocks (examples 5, 6).
    pub dependent_rows: Option<Vec<usize>>,
    pub independent_rows: Option<Vec<usize>>,
}

impl SimOutput {
    /// `intercept + loadings * factors + errors`.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let mut y = &self.loadings * &self.factors + &self.errors;
        for mut col in y.column_iter_mut() {
            col += &self.intercept;
        }
        y
    }
}

mod stream {
    pub const LOADING_K: u64 = 1;
    pub const LOADING_W: u64 = 2;
    pub const FACTOR_K: u64 = 3;
    pub const FACTOR_W: u64 = 4;
    pub const ERRORS: u64 = 5;
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary AR(1) path with unit-variance innovations.
pub fn ar1_series<R: Rng + ?Sized>(phi: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let z: f64 = StandardNormal.sample(rng);
    let mut x = z / (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(n);
    out.push(x);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(rng);
        x = phi * x + e;
        out.push(x);
    }
    out
}

fn normal_vec<R: Rng + ?Sized>(sd: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let dist = Normal::new(0.0, sd).expect("finite positive sd");
    (0..n).map(|_| dist.sample(rng)).collect()
}

fn uniform_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn generate(spec: &DgpSpec) -> Result<SimOutput> {
    spec.validate()?;
    let (p, t, seed) = (spec.p, spec.t, spec.seed);
    let mut intercept = DVector::zeros(p);
    let mut dependent_rows = None;
    let mut independent_rows = None;

    let (loadings, factors, errors) = match spec.example {
        1..=3 => {
            let b = uniform_vec(p, &mut rng_for(seed, stream::LOADING_K));
            let a = uniform_vec(p, &mut rng_for(seed, stream::LOADING_W));
            let k = ar1_series(0.8, t, &mut rng_for(seed, stream::FACTOR_K));
            let mut wr = rng_for(seed, stream::FACTOR_W);
            let w = match spec.example {
                1 => normal_vec(1.0, t, &mut wr),
                2 => ar1_series(0.05, t, &mut wr),
                _ => ar1_series(0.2, t, &mut wr),
            };
            let loadings = DMatrix::from_fn(p, 2, |i, j| if j == 0 { b[i] } else { a[i] });
            let factors = DMatrix::from_fn(2, t, |j, s| if j == 0 { k[s] } else { w[s] });
            let e = normal_vec(0.2, p * t, &mut rng_for(seed, stream::ERRORS));
            (loadings, factors, DMatrix::from_vec(p, t, e))
        }
        4 => {
            let mut lr = rng_for(seed, stream::LOADING_K);
            let raw = DVector::from_vec(normal_vec(1.0, p, &mut lr));
            let b = &raw / raw.norm();
            intercept = DVector::from_vec(normal_vec(1.0, p, &mut rng_for(seed, stream::LOADING_W)));
            let k = ar1_series(0.7, t, &mut rng_for(seed, stream::FACTOR_K));
            let e = normal_vec(1.0, p * t, &mut rng_for(seed, stream::ERRORS));
            (
                DMatrix::from_column_slice(p, 1, b.as_slice()),
                DMatrix::from_row_slice(1, t, &k),
                DMatrix::from_vec(p, t, e),
            )
        }
        _ => {
            let n_dep = spec.dependent_count()?.expect("examples 5 and 6 have a block split");
            let (phi, err_sd, w_sd) = if spec.example == 5 {
                (0.8, 0.2, 1.5)
            } else {
                (0.7, 0.5, 3.0)
            };
            let b = uniform_vec(n_dep, &mut rng_for(seed, stream::LOADING_K));
            let a = uniform_vec(p - n_dep, &mut rng_for(seed, stream::LOADING_W));
            let k = ar1_series(phi, t, &mut rng_for(seed, stream::FACTOR_K));
            let w = normal_vec(w_sd, t, &mut rng_for(seed, stream::FACTOR_W));
            let loadings = DMatrix::from_fn(p, 2, |i, j| match (j, i < n_dep) {
                (0, true) => b[i],
                (1, false) => a[i - n_dep],
                _ => 0.0,
            });
            let factors = DMatrix::from_fn(2, t, |j, s| if j == 0 { k[s] } else { w[s] });
            let e = normal_vec(err_sd, p * t, &mut rng_for(seed, stream::ERRORS));
            dependent_rows = Some((0..n_dep).collect());
            independent_rows = Some((n_dep..p).collect());
            (loadings, factors, DMatrix::from_vec(p, t, e))
        }
    };

    let mut out = SimOutput {
        spec: spec.clone(),
        panel: Panel::from_matrix(DMatrix::zeros(p, t))?,
        loadings,
        factors,
        intercept,
        errors,
        dependent_rows,
        independent_rows,
    };
    out.panel = Panel::from_matrix(out.reassemble())?;
    Ok(out)
}
