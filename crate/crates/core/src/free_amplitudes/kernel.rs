use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary_fields::{CircleField, HalfCircleField};
use crate::error::{Error, Result};
use crate::harmonic_dn::{dn_annulus, CylinderGeometry};

use super::log_z_normalization;

/// `Σ_{n>N} log(1 − e^{−2nt})`, stopping once terms drop below 1e-17.
pub fn log_euler_tail(t: f64, n_cut: usize) -> f64 {
    let mut acc = 0.0;
    let mut n = n_cut + 1;
    loop {
        let term = -(-2.0 * n as f64 * t).exp();
        if term.abs() < 1e-17 {
            break;
        }
        acc += (term).ln_1p();
        n += 1;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeId {
    Zero,
    X(usize),
    Y(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable {
    pub boundary: u32,
    pub mode: ModeId,
}

/// `u ↦ exp(−½ uᵀ A u + bᵀ u + log_const)` over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    pub variables: Vec<Variable>,
    pub quadratic: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub log_const: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelRecord {
    variables: Vec<Variable>,
    quadratic: Vec<Vec<f64>>,
    linear: Vec<f64>,
    log_const: f64,
}

impl GaussianKernel {
    pub fn new(
        variables: Vec<Variable>,
        quadratic: DMatrix<f64>,
        linear: DVector<f64>,
        log_const: f64,
    ) -> Result<Self> {
        let n = variables.len();
        if quadratic.nrows() != n || quadratic.ncols() != n || linear.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} variables against a {}x{} quadratic and {} linear terms",
                n,
                quadratic.nrows(),
                quadratic.ncols(),
                linear.len()
            )));
        }
        let scale = quadratic.amax().max(1.0);
        if (&quadratic - quadratic.transpose()).amax() > 1e-12 * scale {
            return Err(Error::ShapeMismatch("quadratic part is not symmetric".into()));
        }
        Ok(Self { variables, quadratic, linear, log_const })
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn position(&self, v: &Variable) -> Option<usize> {
        self.variables.iter().position(|w| w == v)
    }

    pub fn log_value(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        -0.5 * u.dot(&(&self.quadratic * &u)) + self.linear.dot(&u) + self.log_const
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.log_value(u).exp()
    }

    /// Variable vector for named boundary data; absent variables are 0.
    pub fn assemble(&self, data: &HashMap<Variable, f64>) -> Vec<f64> {
        self.variables.iter().map(|v| data.get(v).copied().unwrap_or(0.0)).collect()
    }

    pub fn with_log_factor(mut self, log_factor: f64) -> Self {
        self.log_const += log_factor;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let n = self.dim();
        let rec = KernelRecord {
            variables: self.variables.clone(),
            quadratic: (0..n).map(|i| (0..n).map(|j| self.quadratic[(i, j)]).collect()).collect(),
            linear: self.linear.iter().copied().collect(),
            log_const: self.log_const,
        };
        Ok(serde_json::to_string(&rec)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: KernelRecord = serde_json::from_str(s)?;
        let n = rec.variables.len();
        if rec.quadratic.len() != n || rec.quadratic.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("quadratic rows do not match variables".into()));
        }
        let q = DMatrix::from_fn(n, n, |i, j| rec.quadratic[i][j]);
        Self::new(rec.variables, q, DVector::from_vec(rec.linear), rec.log_const)
    }
}

/// Half-circle datum as named variables on `boundary`.
pub fn half_variables(boundary: u32, f: &HalfCircleField<f64>, into: &mut HashMap<Variable, f64>) {
    into.insert(Variable { boundary, mode: ModeId::Zero }, f.c);
    for (i, x) in f.modes.iter().enumerate() {
        into.insert(Variable { boundary, mode: ModeId::X(i + 1) }, *x);
    }
}

/// Circle datum as named variables on `boundary`.
pub fn circle_variables(boundary: u32, f: &CircleField<f64>, into: &mut HashMap<Variable, f64>) {
    into.insert(Variable { boundary, mode: ModeId::Zero }, f.c);
    for (i, (x, y)) in f.modes.iter().enumerate() {
        into.insert(Variable { boundary, mode: ModeId::X(i + 1) }, *x);
        into.insert(Variable { boundary, mode: ModeId::Y(i + 1) }, *y);
    }
}

fn cylinder_kernel(
    geom: &CylinderGeometry<f64>,
    n_cut: usize,
    outer: u32,
    inner: u32,
    with_z: bool,
) -> Result<GaussianKernel> {
    if outer == inner {
        return Err(Error::ShapeMismatch("outer and inner boundary ids coincide".into()));
    }
    let half = geom.half();
    let op = dn_annulus(geom, n_cut).minus_model();
    let mut variables = Vec::new();
    for b in [outer, inner] {
        variables.push(Variable { boundary: b, mode: ModeId::Zero });
        for n in 1..=n_cut {
            variables.push(Variable { boundary: b, mode: ModeId::X(n) });
            if !half {
                variables.push(Variable { boundary: b, mode: ModeId::Y(n) });
            }
        }
    }
    let dim = variables.len();
    let pos: HashMap<Variable, usize> = variables.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut a = DMatrix::zeros(dim, dim);
    // exponent −½(φ,(D_Σ−D)φ)₂ with the half pairing carrying its ½ weight
    let zero_scale = if half { 0.5 } else { 1.0 };
    let ids = [outer, inner];
    let put = |a: &mut DMatrix<f64>, mode: ModeId, block: &crate::harmonic_dn::Block<f64>, scale: f64| {
        for i in 0..2 {
            for j in 0..2 {
                let r = pos[&Variable { boundary: ids[i], mode }];
                let c = pos[&Variable { boundary: ids[j], mode }];
                a[(r, c)] += scale * block.entry(i, j);
            }
        }
    };
    put(&mut a, ModeId::Zero, op.block(0), zero_scale);
    for n in 1..=n_cut {
        let scale = 1.0 / (2.0 * n as f64);
        put(&mut a, ModeId::X(n), op.block(n), scale);
        if !half {
            put(&mut a, ModeId::Y(n), op.block(n), scale);
        }
    }
    let log_const = if with_z { log_z_normalization(geom)? } else { 0.0 };
    GaussianKernel::new(variables, a, DVector::zeros(dim), log_const)
}

/// `A⁰` (times `Z` if `with_z`) of the half-annulus as a kernel in
/// `(c, x_1..x_N)` of the outer and inner half-circles.
pub fn half_annulus_kernel(
    geom: &CylinderGeometry<f64>,
    n_cut: usize,
    outer: u32,
    inner: u32,
    with_z: bool,
) -> Result<GaussianKernel> {
    if !geom.half() {
        return Err(Error::ShapeMismatch("expected a half-annulus geometry".into()));
    }
    cylinder_kernel(geom, n_cut, outer, inner, with_z)
}

/// `A⁰` (times `Z` if `with_z`) of the annulus in `(c, x_n, y_n)` of both circles.
pub fn annulus_kernel(
    geom: &CylinderGeometry<f64>,
    n_cut: usize,
    outer: u32,
    inner: u32,
    with_z: bool,
) -> Result<GaussianKernel> {
    if geom.half() {
        return Err(Error::ShapeMismatch("expected a full annulus geometry".into()));
    }
    cylinder_kernel(geom, n_cut, outer, inner, with_z)
}

/// Integrates the product `K1·K2` over the variables of boundary `shared`:
/// mode coordinates against standard normal weights, the zero mode against
/// Lebesgue measure when `integrate_zero_mode`.
pub fn glue_gaussian(
    k1: &GaussianKernel,
    k2: &GaussianKernel,
    shared: u32,
    integrate_zero_mode: bool,
) -> Result<GaussianKernel> {
    let is_shared = |v: &Variable| v.boundary == shared && (integrate_zero_mode || v.mode != ModeId::Zero);
    let mut s1: Vec<Variable> = k1.variables.iter().copied().filter(is_shared).collect();
    let mut s2: Vec<Variable> = k2.variables.iter().copied().filter(is_shared).collect();
    s1.sort();
    s2.sort();
    if s1.is_empty() || s1 != s2 {
        return Err(Error::ShapeMismatch(format!(
            "boundary {shared} carries {} variables in the first kernel and {} in the second",
            s1.len(),
            s2.len()
        )));
    }

    let mut vars = k1.variables.clone();
    for v in &k2.variables {
        if !vars.contains(v) {
            vars.push(*v);
        }
    }
    let n = vars.len();
    let pos: HashMap<Variable, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for k in [k1, k2] {
        let map: Vec<usize> = k.variables.iter().map(|v| pos[v]).collect();
        for i in 0..k.dim() {
            b[map[i]] += k.linear[i];
            for j in 0..k.dim() {
                a[(map[i], map[j])] += k.quadratic[(i, j)];
            }
        }
    }
    let mut log_const = k1.log_const + k2.log_const;

    let (si, ri): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| is_shared(&vars[*i]));
    for &i in &si {
        if vars[i].mode != ModeId::Zero {
            a[(i, i)] += 1.0;
            log_const -= 0.5 * (2.0 * std::f64::consts::PI).ln();
        }
    }
    let ass = a.select_rows(&si).select_columns(&si);
    let asr = a.select_rows(&si).select_columns(&ri);
    let arr = a.select_rows(&ri).select_columns(&ri);
    let bs = b.select_rows(&si);
    let br = b.select_rows(&ri);
    let chol = ass.clone().cholesky().ok_or(Error::NotPositiveDefinite { dim: si.len() })?;
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|d: &f64| d.ln()).sum::<f64>();
    let inv_asr = chol.solve(&asr);
    let inv_bs = chol.solve(&bs);
    let mut quad = arr - asr.transpose() * &inv_asr;
    quad = (&quad + quad.transpose()) * 0.5;
    let lin = br - asr.transpose() * &inv_bs;
    log_const += 0.5 * si.len() as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet + 0.5 * bs.dot(&inv_bs);
    GaussianKernel::new(ri.iter().map(|i| vars[*i]).collect(), quad, lin, log_const)
}

/// Log of the factor contributed by integrating the modes above `n_cut` when
/// gluing cylinders of lengths `t1` and `t2`: truncated kernels glue to the
/// truncated long kernel times `exp` of this.
pub fn tail_gluing_correction(t1: f64, t2: f64, half: bool, n_cut: usize) -> f64 {
    let mult = if half { 0.5 } else { 1.0 };
    mult * (log_euler_tail(t1, n_cut) + log_euler_tail(t2, n_cut) - log_euler_tail(t1 + t2, n_cut))
}

/// Entrywise comparison of two kernels over the same variable set, after
/// multiplying the first by `exp(log_factor)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingResidual {
    pub quadratic: f64,
    pub linear: f64,
    pub log_const: f64,
}

pub fn gluing_residuals(a: &GaussianKernel, b: &GaussianKernel, log_factor: f64) -> Result<GluingResidual> {
    let mut va = a.variables.clone();
    let mut vb = b.variables.clone();
    va.sort();
    vb.sort();
    if va != vb {
        return Err(Error::ShapeMismatch("kernels live on different variables".into()));
    }
    let map: Vec<usize> = a.variables.iter().map(|v| b.position(v).unwrap()).collect();
    let mut q: f64 = 0.0;
    let mut l: f64 = 0.0;
    for i in 0..a.dim() {
        l = l.max((a.linear[i] - b.linear[map[i]]).abs());
        for j in 0..a.dim() {
            q = q.max((a.quadratic[(i, j)] - b.quadratic[(map[i], map[j])]).abs());
        }
    }
    Ok(GluingResidual { quadratic: q, linear: l, log_const: (a.log_const + log_factor - b.log_const).abs() })
}
