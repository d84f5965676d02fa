//! Decoupling residuals `‖ρ_{RS} − ρ_R ⊗ ρ_S‖_F`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::{for_each_codeword, SchemeInstance};
use crate::error::{Error, Result};
use crate::limits::{self, Limits};

type Entries = Vec<((u64, u64), f64)>;

/// The reference-entangled code state `q^{-1/2} Σ_s |s⟩_R ⊗ encode(s)`.
///
/// Qudit 0 is the reference, qudit `i + 1` is code share `i`. All
/// amplitudes are equal and real. Residuals depend only on the code and the
/// share mask, so they are cached here and shared by every scheme using the
/// same code.
struct CodeState {
    q: u32,
    n_code: usize,
    width: usize,
    /// Row-major digits, `width` per support element.
    digits: Vec<u8>,
    amp: f64,
    cache: Mutex<HashMap<u64, f64>>,
    reference_mixed: OnceLock<bool>,
}

type CodeKey = (u32, u32, Vec<u32>);

fn registry() -> &'static Mutex<HashMap<CodeKey, Arc<CodeState>>> {
    static REGISTRY: OnceLock<Mutex<HashMap<CodeKey, Arc<CodeState>>>> = OnceLock::new();
    REGISTRY.get_or_init(Default::default)
}

/// Residual oracle for one scheme.
pub struct Simulator {
    scheme: SchemeInstance,
    code: Arc<CodeState>,
}

impl Simulator {
    /// Reuses the code state of any earlier simulator with the same field,
    /// threshold and evaluation points.
    pub fn new(scheme: &SchemeInstance) -> Result<Self> {
        scheme.validate()?;
        let key = (scheme.q, scheme.k, scheme.points.clone());
        if let Some(code) = registry().lock().expect("code registry poisoned").get(&key) {
            return Ok(Simulator {
                scheme: scheme.clone(),
                code: code.clone(),
            });
        }
        let sim = Self::fresh(scheme)?;
        registry()
            .lock()
            .expect("code registry poisoned")
            .insert(key, sim.code.clone());
        Ok(sim)
    }

    /// A simulator with its own empty residual cache.
    pub fn fresh(scheme: &SchemeInstance) -> Result<Self> {
        scheme.validate()?;
        let size = scheme.check_support(scheme.k)?;
        if scheme.q > u8::MAX as u32 {
            return Err(Error::InvalidScheme(format!("field order {} exceeds 255", scheme.q)));
        }
        let width = scheme.n_code() + 1;
        let mut digits = Vec::with_capacity(size as usize * width);
        for s in 0..scheme.q {
            for_each_codeword(scheme, s, |w| {
                digits.push(s as u8);
                digits.extend(w.iter().map(|&d| d as u8));
            });
        }
        Ok(Simulator {
            scheme: scheme.clone(),
            code: Arc::new(CodeState {
                q: scheme.q,
                n_code: scheme.n_code(),
                width,
                digits,
                amp: 1.0 / (size as f64).sqrt(),
                cache: Mutex::new(HashMap::new()),
                reference_mixed: OnceLock::new(),
            }),
        })
    }

    pub fn scheme(&self) -> &SchemeInstance {
        &self.scheme
    }

    pub fn support(&self) -> usize {
        self.code.digits.len() / self.code.width
    }

    /// Frobenius norm of `ρ_{RS} − ρ_R ⊗ ρ_S` for the code shares in
    /// `shares`.
    pub fn residual(&self, shares: u64) -> Result<f64> {
        self.code.residual(shares)
    }
}

impl CodeState {
    fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.digits.chunks_exact(self.width)
    }

    /// Packs the digits of `row` at the qudits in `mask`, lowest qudit least
    /// significant.
    fn key(&self, row: &[u8], mask: u64) -> u64 {
        let q = self.q as u64;
        let mut key = 0u64;
        let mut scale = 1u64;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            key += row[i] as u64 * scale;
            scale *= q;
            m &= m - 1;
        }
        key
    }

    fn full_mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    /// `(traced key, kept key)` per row, sorted so that rows agreeing
    /// outside `keep` are adjacent.
    fn grouped(&self, keep: u64) -> Vec<(u64, u64)> {
        let traced = self.full_mask() & !keep;
        let mut pairs: Vec<(u64, u64)> = self.rows().map(|row| (self.key(row, traced), self.key(row, keep))).collect();
        pairs.sort_unstable();
        pairs
    }

    /// Number of entries the reduced state would accumulate.
    fn reduced_cost(pairs: &[(u64, u64)]) -> u64 {
        pairs.chunk_by(|a, b| a.0 == b.0).map(|g| (g.len() as u64).pow(2)).sum()
    }

    /// Sparse reduced state on the kept qudits, entries sorted by index.
    fn reduced(&self, pairs: &[(u64, u64)]) -> Entries {
        let a2 = self.amp * self.amp;
        let singletons = pairs.windows(2).all(|w| w[0].0 != w[1].0);
        if singletons {
            let mut kept: Vec<u64> = pairs.iter().map(|p| p.1).collect();
            kept.sort_unstable();
            return kept
                .chunk_by(|a, b| a == b)
                .map(|run| ((run[0], run[0]), run.len() as f64 * a2))
                .collect();
        }
        let mut entries: Vec<(u64, u64)> = Vec::with_capacity(pairs.len());
        for g in pairs.chunk_by(|a, b| a.0 == b.0) {
            for &(_, i) in g {
                for &(_, j) in g {
                    entries.push((i, j));
                }
            }
        }
        entries.sort_unstable();
        entries
            .chunk_by(|a, b| a == b)
            .map(|run| (run[0], run.len() as f64 * a2))
            .collect()
    }

    /// `Tr ρ_X²` for the qudits in `keep`. The state is pure, so this
    /// equals the purity of the complement; whichever reduced state is
    /// smaller is built.
    fn purity(&self, keep: u64) -> Result<f64> {
        let limit = limits::active().support;
        let other = self.grouped(keep);
        let mut best = other;
        let mut cost = Self::reduced_cost(&best);
        if cost > limit {
            let this = self.grouped(self.full_mask() & !keep);
            let c = Self::reduced_cost(&this);
            if c < cost {
                best = this;
                cost = c;
            }
        }
        Limits::check("reduced-state entries", cost, limit)?;
        Ok(self.reduced(&best).iter().map(|(_, v)| v * v).sum())
    }

    fn residual(&self, shares: u64) -> Result<f64> {
        let shares = shares & ((1u64 << self.n_code) - 1);
        if shares == 0 {
            return Ok(0.0);
        }
        if let Some(&r) = self.cache.lock().expect("residual cache poisoned").get(&shares) {
            return Ok(r);
        }
        let r = self.compute_residual(shares)?;
        self.cache.lock().expect("residual cache poisoned").insert(shares, r);
        Ok(r)
    }

    fn compute_residual(&self, shares: u64) -> Result<f64> {
        let keep = 1 | shares << 1;
        let limit = limits::active().support;
        let pairs = self.grouped(keep);
        if Self::reduced_cost(&pairs) <= limit {
            let rho = self.reduced(&pairs);
            if let Some(norm) = self.direct_residual(&rho, limit) {
                return Ok(norm);
            }
        }
        // ‖D‖² = Tr ρ_RS² − 2 Tr ρ_RS(ρ_R ⊗ ρ_S) + Tr ρ_R² Tr ρ_S², and the
        // cross term is Tr ρ_S² / q when ρ_R = I/q.
        self.check_reference()?;
        let q = self.q as f64;
        let p_rs = self.purity(self.full_mask() & !keep)?;
        let p_s = self.purity(1 | (self.full_mask() & !keep))?;
        Ok((p_rs - p_s / q).max(0.0).sqrt())
    }

    fn check_reference(&self) -> Result<()> {
        let ok = *self.reference_mixed.get_or_init(|| {
            let q = self.q as u64;
            let rho_r = self.reduced(&self.grouped(1));
            let diag_ok = (0..q).all(|r| {
                rho_r
                    .binary_search_by_key(&(r, r), |(k, _)| *k)
                    .is_ok_and(|i| (rho_r[i].1 - 1.0 / q as f64).abs() <= 1e-12)
            });
            diag_ok && rho_r.iter().all(|((i, j), v)| i == j || v.abs() <= 1e-12)
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScheme("reference is not maximally mixed".into()))
        }
    }

    /// Entry-wise difference on the sparse supports, or `None` when the
    /// product term is too large to expand.
    fn direct_residual(&self, rho_rs: &[((u64, u64), f64)], limit: u64) -> Option<f64> {
        let q = self.q as u64;
        let qs = q as usize;
        // kept index = r + q·a with r the reference digit
        let mut rho_r = vec![0.0f64; qs * qs];
        let mut rho_s: Vec<((u64, u64), f64)> = Vec::new();
        for &((i, j), v) in rho_rs {
            let (ri, si) = (i % q, i / q);
            let (rj, sj) = (j % q, j / q);
            if si == sj {
                rho_r[ri as usize * qs + rj as usize] += v;
            }
            if ri == rj {
                rho_s.push(((si, sj), v));
            }
        }
        rho_s.sort_unstable_by_key(|e| e.0);
        let rho_s: Entries = rho_s
            .chunk_by(|a, b| a.0 == b.0)
            .map(|run| (run[0].0, run.iter().map(|e| e.1).sum()))
            .filter(|e: &((u64, u64), f64)| e.1.abs() > 1e-15)
            .collect();
        let r_nz: Vec<((u64, u64), f64)> = (0..qs * qs)
            .filter(|&x| rho_r[x].abs() > 1e-15)
            .map(|x| (((x / qs) as u64, (x % qs) as u64), rho_r[x]))
            .collect();
        if (r_nz.len() as u64).saturating_mul(rho_s.len() as u64) > limit {
            return None;
        }
        // For a fixed (r, r') the product keys (r + q·a, r' + q·a') increase
        // with (a, a'), so each pass is a merge against the sorted ρ_RS.
        let mut matched = vec![false; rho_rs.len()];
        let mut norm = 0.0;
        for &((ri, rj), a) in &r_nz {
            let mut pos = 0;
            for &((si, sj), b) in &rho_s {
                let key = (ri + q * si, rj + q * sj);
                while pos < rho_rs.len() && rho_rs[pos].0 < key {
                    pos += 1;
                }
                let v = if pos < rho_rs.len() && rho_rs[pos].0 == key {
                    matched[pos] = true;
                    rho_rs[pos].1
                } else {
                    0.0
                };
                let d = v - a * b;
                norm += d * d;
            }
        }
        norm += rho_rs
            .iter()
            .zip(&matched)
            .filter(|(_, &m)| !m)
            .map(|(e, _)| e.1 * e.1)
            .sum::<f64>();
        Some(norm.sqrt())
    }
}

/// The same residual from a dense state vector and explicit partial
/// traces, for cross-checking.
pub fn dense_residual(scheme: &SchemeInstance, shares: u64) -> Result<f64> {
    scheme.validate()?;
    let lim = limits::active();
    let q = scheme.q as usize;
    let width = scheme.n_code() + 1;
    let total = (q as u64).checked_pow(width as u32).unwrap_or(u64::MAX);
    Limits::check("dense state dimension", total, lim.dense)?;
    let shares = shares & ((1u64 << scheme.n_code()) - 1);
    let keep_qudits: Vec<usize> = std::iter::once(0)
        .chain((0..scheme.n_code()).filter(|i| shares >> i & 1 == 1).map(|i| i + 1))
        .collect();
    let traced_qudits: Vec<usize> = (0..width).filter(|i| !keep_qudits.contains(i)).collect();
    let dim_x = q.pow(keep_qudits.len() as u32);
    let dim_y = q.pow(traced_qudits.len() as u32);
    Limits::check("dense reduced dimension", dim_x as u64, lim.dense_reduced_dim)?;

    let mut psi = vec![Complex64::new(0.0, 0.0); total as usize];
    let amp = 1.0 / (q as f64).powi(scheme.k as i32).sqrt();
    for s in 0..scheme.q {
        for_each_codeword(scheme, s, |w| {
            let mut digits = vec![s];
            digits.extend_from_slice(w);
            psi[super::pack(&digits, scheme.q) as usize] += amp;
        });
    }

    // psi[(x, y)] with x over kept qudits and y over traced qudits
    let index = |x: usize, y: usize| -> usize {
        let mut digits = vec![0u32; width];
        let (mut x, mut y) = (x, y);
        for &i in &keep_qudits {
            digits[i] = (x % q) as u32;
            x /= q;
        }
        for &i in &traced_qudits {
            digits[i] = (y % q) as u32;
            y /= q;
        }
        super::pack(&digits, scheme.q) as usize
    };
    let mut rho = vec![Complex64::new(0.0, 0.0); dim_x * dim_x];
    for y in 0..dim_y {
        let col: Vec<Complex64> = (0..dim_x).map(|x| psi[index(x, y)]).collect();
        for i in 0..dim_x {
            if col[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim_x {
                rho[i * dim_x + j] += col[i] * col[j].conj();
            }
        }
    }
    // kept index x = r + q·a with r the reference digit
    let dim_s = dim_x / q;
    let mut rho_r = vec![Complex64::new(0.0, 0.0); q * q];
    let mut rho_s = vec![Complex64::new(0.0, 0.0); dim_s * dim_s];
    for r in 0..q {
        for r2 in 0..q {
            for a in 0..dim_s {
                rho_r[r * q + r2] += rho[(r + q * a) * dim_x + (r2 + q * a)];
            }
        }
    }
    for a in 0..dim_s {
        for a2 in 0..dim_s {
            for r in 0..q {
                rho_s[a * dim_s + a2] += rho[(r + q * a) * dim_x + (r + q * a2)];
            }
        }
    }
    let mut norm = 0.0;
    for i in 0..dim_x {
        for j in 0..dim_x {
            let prod = rho_r[(i % q) * q + j % q] * rho_s[(i / q) * dim_s + j / q];
            norm += (rho[i * dim_x + j] - prod).norm_sqr();
        }
    }
    Ok(norm.sqrt())
}
