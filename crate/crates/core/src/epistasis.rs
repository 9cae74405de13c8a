//! Pairwise interaction (epistasis) tests for two loci and a quantitative
//! phenotype.
//!
//! All variables are mean-centered in place of an intercept column. The three
//! predictors `(g_i | g_j | I_ij)`, with `I_ij = g_i ∘ g_j`, are orthogonalized
//! once; the phenotype only enters through inner products with that basis:
//!
//! ```text
//! β3 = <q_I, p> / <q_I, I>
//! T  = β3 · sqrt((m − 4) <q_I, I> / <q_p, p>)
//! ```
//!
//! where `q_p` is the phenotype with its projections on the predictor basis
//! removed, so `<q_p, p>` is the residual sum of squares. Permutation tests
//! therefore reuse the basis and recompute only phenotype-side products.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{axpy, check_len, dot_unchecked, DenseMatrix, DenseVector};
use crate::sgso::{sgso, SgsoBasis};

/// Interaction coefficient and t-statistic for loci `i` and `j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStat {
    pub i: usize,
    pub j: usize,
    pub beta3: f64,
    /// Infinite (with the sign of `beta3`) when the phenotype is fitted exactly.
    pub tstat: f64,
    pub dof: usize,
}

/// One entry of a pairwise scan.
#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    Tested {
        stat: PairStat,
        p_perm: Option<f64>,
    },
    /// The pair's design was singular (e.g. a monomorphic locus).
    Skipped { i: usize, j: usize, reason: Error },
}

impl PairOutcome {
    pub fn pair(&self) -> (usize, usize) {
        match self {
            PairOutcome::Tested { stat, .. } => (stat.i, stat.j),
            PairOutcome::Skipped { i, j, .. } => (*i, *j),
        }
    }
}

/// The orthogonalized predictor side of one locus pair, reusable across
/// phenotypes.
#[derive(Debug, Clone)]
pub struct InteractionModel {
    basis: SgsoBasis,
    interaction: DenseVector,
    m: usize,
}

impl InteractionModel {
    pub fn new(g_i: &[f64], g_j: &[f64]) -> Result<Self> {
        let m = g_i.len();
        check_len(g_j.len(), m, "second locus")?;
        if m <= 4 {
            return Err(Error::InsufficientSamples { samples: m });
        }
        let inter: DenseVector = g_i.iter().zip(g_j).map(|(a, b)| a * b).collect();
        let gi = DenseVector::new(g_i.to_vec()).centered();
        let gj = DenseVector::new(g_j.to_vec()).centered();
        let inter = inter.centered();
        let x = DenseMatrix::from_columns(&[&gi[..], &gj[..], &inter[..]])?;
        let basis = sgso(&x, crate::DEFAULT_PIVOT_FLOOR)?;
        Ok(InteractionModel {
            basis,
            interaction: inter,
            m,
        })
    }

    pub fn samples(&self) -> usize {
        self.m
    }

    pub fn dof(&self) -> usize {
        self.m - 4
    }

    /// `(β3, T)` for an already centered phenotype.
    pub fn stat_centered(&self, pheno: &[f64]) -> (f64, f64) {
        let q = self.basis.q();
        let q_inter = q.col(2);
        let pivot = dot_unchecked(q_inter, &self.interaction);
        let beta3 = dot_unchecked(q_inter, pheno) / pivot;

        let mut qp = pheno.to_vec();
        for k in 0..3 {
            let c = self.basis.dual_dot(k, &qp);
            axpy(&mut qp, -c, q.col(k));
        }
        let rss = dot_unchecked(&qp, pheno);
        let tstat = if rss > 0.0 {
            beta3 * ((self.dof() as f64) * pivot / rss).sqrt()
        } else if beta3 == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(beta3)
        };
        (beta3, tstat)
    }

    /// `(β3, T)` for a raw phenotype.
    pub fn stat(&self, pheno: &[f64]) -> Result<(f64, f64)> {
        check_len(pheno.len(), self.m, "phenotype")?;
        let p = DenseVector::new(pheno.to_vec()).centered();
        Ok(self.stat_centered(&p))
    }

    /// `T` for each given permutation of the phenotype.
    pub fn permuted_tstats(&self, pheno: &[f64], perms: &[Vec<usize>]) -> Result<Vec<f64>> {
        check_len(pheno.len(), self.m, "phenotype")?;
        for perm in perms {
            check_permutation(perm, self.m)?;
        }
        let centered = DenseVector::new(pheno.to_vec()).centered();
        Ok(perms
            .par_iter()
            .map(|perm| {
                let permuted: Vec<f64> = perm.iter().map(|&k| centered[k]).collect();
                self.stat_centered(&permuted).1
            })
            .collect())
    }

    /// Add-one permutation p-value `(1 + #{|T_perm| ≥ |T_obs|}) / (1 + n)`.
    pub fn pvalue_with(&self, pheno: &[f64], perms: &[Vec<usize>]) -> Result<f64> {
        if perms.is_empty() {
            return Err(Error::InvalidArgument("need at least one permutation".into()));
        }
        let centered = DenseVector::new(pheno.to_vec()).centered();
        check_len(pheno.len(), self.m, "phenotype")?;
        let observed = self.stat_centered(&centered).1.abs();
        let hits = self
            .permuted_tstats(pheno, perms)?
            .into_iter()
            .filter(|t| t.abs() >= observed)
            .count();
        Ok((1 + hits) as f64 / (1 + perms.len()) as f64)
    }

    /// Permutation p-value over `n_perm` seeded random permutations.
    pub fn pvalue(&self, pheno: &[f64], n_perm: usize, seed: u64) -> Result<f64> {
        if n_perm == 0 {
            return Err(Error::InvalidArgument("need at least one permutation".into()));
        }
        self.pvalue_with(pheno, &permutations(self.m, n_perm, seed))
    }
}

fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    check_len(perm.len(), m, "permutation")?;
    let mut seen = vec![false; m];
    for &k in perm {
        if k >= m || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidArgument(format!(
                "not a permutation of 0..{m}"
            )));
        }
    }
    Ok(())
}

/// `n` uniform permutations of `0..m`. Permutation `k` is drawn from its own
/// ChaCha stream of `seed`, so any subset can be regenerated independently.
pub fn permutations(m: usize, n: usize, seed: u64) -> Vec<Vec<usize>> {
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut idx: Vec<usize> = (0..m).collect();
            idx.shuffle(&mut rng);
            idx
        })
        .collect()
}

/// Interaction test for one locus pair. The returned pair indices are `(0, 1)`.
pub fn interaction_stat(g_i: &[f64], g_j: &[f64], pheno: &[f64]) -> Result<PairStat> {
    let model = InteractionModel::new(g_i, g_j)?;
    let (beta3, tstat) = model.stat(pheno)?;
    Ok(PairStat {
        i: 0,
        j: 1,
        beta3,
        tstat,
        dof: model.dof(),
    })
}

/// Permutation p-value for one locus pair.
pub fn permutation_pvalue(
    g_i: &[f64],
    g_j: &[f64],
    pheno: &[f64],
    n_perm: usize,
    seed: u64,
) -> Result<f64> {
    InteractionModel::new(g_i, g_j)?.pvalue(pheno, n_perm, seed)
}

/// Every pair `i < j` of the columns of `g`, in lexicographic order. Singular
/// pairs are reported as skipped. With `n_perm > 0` each tested pair also gets
/// a permutation p-value; all pairs share the same permutations.
pub fn pairwise_scan(
    g: &DenseMatrix,
    pheno: &[f64],
    n_perm: usize,
    seed: u64,
) -> Result<Vec<PairOutcome>> {
    let (m, loci) = g.shape();
    check_len(pheno.len(), m, "phenotype")?;
    if m <= 4 {
        return Err(Error::InsufficientSamples { samples: m });
    }
    if loci < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two loci, got {loci}"
        )));
    }
    let perms = if n_perm > 0 {
        permutations(m, n_perm, seed)
    } else {
        Vec::new()
    };
    let pairs: Vec<(usize, usize)> = (0..loci)
        .flat_map(|i| (i + 1..loci).map(move |j| (i, j)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            let model = match InteractionModel::new(g.col(i), g.col(j)) {
                Ok(model) => model,
                Err(e) if e.is_singular() => {
                    return Ok(PairOutcome::Skipped { i, j, reason: e })
                }
                Err(e) => return Err(e),
            };
            let (beta3, tstat) = model.stat(pheno)?;
            let p_perm = if perms.is_empty() {
                None
            } else {
                Some(model.pvalue_with(pheno, &perms)?)
            };
            Ok(PairOutcome::Tested {
                stat: PairStat {
                    i,
                    j,
                    beta3,
                    tstat,
                    dof: model.dof(),
                },
                p_perm,
            })
        })
        .collect()
}
