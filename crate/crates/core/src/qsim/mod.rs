//! Sparse qudit simulation of polynomial-code threshold schemes.
//!
//! A `((k, 2k−1))` scheme over `F_q` encodes the basis secret `|s⟩` as the
//! uniform superposition of `|f(x₁) … f(x_{2k−1})⟩` over all polynomials `f`
//! of degree `≤ k − 1` whose leading coefficient is `s`. Shares are handed to
//! players according to a bundling map; shares without a holder are
//! discarded.
//!
//! Secrecy and recoverability are checked information-theoretically: the
//! scheme is run on half of a maximally entangled pair with a reference `R`,
//! and a set of shares `S` carries no information exactly when
//! `ρ_{RS} = ρ_R ⊗ ρ_S`. A set recovers the secret exactly when everything
//! outside it decouples.

mod field;
mod residual;
mod verify;

use std::sync::Arc;

use num_complex::Complex64;

pub use field::{eval_poly, leading_coefficient, FieldElement};
pub use residual::{dense_residual, Simulator};
pub use verify::{
    player_subset_report, verify_structure, verify_structure_with, StructureReport, SubsetReport, SubsetVerdict,
};

use crate::decomp::{is_prime, BundledThreshold};
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::structure::{PlayerSet, Universe};

/// Residuals at or below this count as decoupled.
pub const DECOUPLING_TOLERANCE: f64 = 1e-9;

/// A threshold code with its share-to-player assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeInstance {
    pub q: u32,
    pub k: u32,
    /// Evaluation point of each code share.
    pub points: Vec<u32>,
    pub universe: Arc<Universe>,
    /// Holder of each code share; `None` marks a discarded share.
    pub holders: Vec<Option<usize>>,
}

impl SchemeInstance {
    pub fn new(q: u32, k: u32, points: Vec<u32>, universe: Arc<Universe>, holders: Vec<Option<usize>>) -> Result<Self> {
        let s = SchemeInstance {
            q,
            k,
            points,
            universe,
            holders,
        };
        s.validate()?;
        Ok(s)
    }

    /// `((k, 2k−1))` with one share per player, players `P1 … P(2k−1)`.
    pub fn threshold(k: u32, q: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidScheme("threshold must be positive".into()));
        }
        let n = 2 * k as usize - 1;
        Self::new(q, k, (0..n as u32).collect(), Universe::numbered(n)?, (0..n).map(Some).collect())
    }

    /// The code behind a bundled threshold: shares dealt in player order,
    /// `w_p` each, the rest discarded; points `0 … 2k−2`.
    pub fn from_bundled(universe: Arc<Universe>, witness: &BundledThreshold) -> Result<Self> {
        let mut holders: Vec<Option<usize>> = witness
            .participants
            .iter()
            .zip(&witness.weights)
            .flat_map(|(p, &w)| std::iter::repeat_n(Some(p), w as usize))
            .collect();
        let n_code = witness.code_length() as usize;
        if holders.len() > n_code {
            return Err(Error::InvalidScheme(format!(
                "{} shares exceed the code length {n_code}",
                holders.len()
            )));
        }
        holders.resize(n_code, None);
        Self::new(witness.field_order, witness.threshold, (0..n_code as u32).collect(), universe, holders)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScheme(m));
        if !is_prime(self.q) {
            return bad(format!("field order {} is not prime", self.q));
        }
        if self.k == 0 {
            return bad("threshold must be positive".into());
        }
        let n_code = 2 * self.k as usize - 1;
        if self.points.len() != n_code || self.holders.len() != n_code {
            return bad(format!(
                "a threshold-{} code needs {n_code} points and holders, got {} and {}",
                self.k,
                self.points.len(),
                self.holders.len()
            ));
        }
        if n_code > 63 {
            return bad(format!("code length {n_code} exceeds 63"));
        }
        let mut seen = vec![false; self.q as usize];
        for &x in &self.points {
            if x >= self.q || std::mem::replace(&mut seen[x as usize], true) {
                return bad(format!("evaluation point {x} is repeated or not in F_{}", self.q));
            }
        }
        if let Some(h) = self.holders.iter().flatten().find(|&&h| h >= self.universe.len()) {
            return bad(format!("share holder #{h} is not a player"));
        }
        Ok(())
    }

    pub fn n_code(&self) -> usize {
        self.points.len()
    }

    /// Bitmask of the code shares held by `players`.
    pub fn shares_of(&self, players: PlayerSet) -> u64 {
        self.holders
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_some_and(|p| players.contains(p)))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn discarded(&self) -> u64 {
        self.holders
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_none())
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn all_shares(&self) -> u64 {
        (1u64 << self.n_code()) - 1
    }

    /// Share indices per player, players in index order; players without
    /// shares are omitted.
    pub fn bundling(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for p in 0..self.universe.len() {
            let shares: Vec<usize> = (0..self.n_code()).filter(|&i| self.holders[i] == Some(p)).collect();
            if !shares.is_empty() {
                out.push((p, shares));
            }
        }
        out
    }

    fn check_support(&self, exponent: u32) -> Result<u64> {
        let size = (self.q as u64)
            .checked_pow(exponent)
            .ok_or(Error::SizeLimit {
                what: "state support",
                size: u64::MAX,
                limit: limits::active().support as u64,
            })?;
        Limits::check("state support", size, limits::active().support as u64)?;
        Ok(size)
    }
}

/// A state stored as its non-zero amplitudes over basis labels.
///
/// Label digits are base `q`, qudit 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    pub q: u32,
    pub num_qudits: usize,
    /// Sorted by label.
    pub amplitudes: Vec<(u64, Complex64)>,
}

impl SparseState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn pack(&self, digits: &[u32]) -> u64 {
        pack(digits, self.q)
    }

    pub fn digits(&self, label: u64) -> Vec<u32> {
        unpack(label, self.q, self.num_qudits)
    }

    pub fn amplitude(&self, digits: &[u32]) -> Complex64 {
        let label = self.pack(digits);
        self.amplitudes
            .binary_search_by_key(&label, |(l, _)| *l)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i].1)
    }

    /// Kets such as `|012⟩`, qudit 0 first.
    pub fn ket(&self, label: u64) -> String {
        let digits = self.digits(label);
        let sep = if self.q > 10 { "," } else { "" };
        let body: Vec<String> = digits.iter().map(u32::to_string).collect();
        format!("|{}⟩", body.join(sep))
    }
}

pub(crate) fn pack(digits: &[u32], q: u32) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * q as u64 + d as u64)
}

pub(crate) fn unpack(mut label: u64, q: u32, width: usize) -> Vec<u32> {
    (0..width)
        .map(|_| {
            let d = (label % q as u64) as u32;
            label /= q as u64;
            d
        })
        .collect()
}

/// Calls `f` with the code word of every polynomial with leading
/// coefficient `secret`.
pub(crate) fn for_each_codeword(scheme: &SchemeInstance, secret: u32, mut f: impl FnMut(&[u32])) {
    let k = scheme.k as usize;
    let mut coeffs = vec![0u32; k];
    coeffs[k - 1] = secret % scheme.q;
    let mut word = vec![0u32; scheme.n_code()];
    loop {
        for (w, &x) in word.iter_mut().zip(&scheme.points) {
            *w = eval_poly(&coeffs, x, scheme.q);
        }
        f(&word);
        // odometer over the k − 1 free coefficients
        let mut i = 0;
        loop {
            if i == k - 1 {
                return;
            }
            coeffs[i] += 1;
            if coeffs[i] < scheme.q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Encodes the basis secret `|secret⟩`.
pub fn encode(scheme: &SchemeInstance, secret: u32) -> Result<SparseState> {
    scheme.validate()?;
    let size = scheme.check_support(scheme.k - 1)?;
    let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
    let mut amplitudes = Vec::with_capacity(size as usize);
    for_each_codeword(scheme, secret, |w| amplitudes.push((pack(w, scheme.q), amp)));
    amplitudes.sort_by_key(|(l, _)| *l);
    Ok(SparseState {
        q: scheme.q,
        num_qudits: scheme.n_code(),
        amplitudes,
    })
}
