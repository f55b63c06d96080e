//! Dense two-phase tableau simplex with Bland's anti-cycling rule.

use crate::error::{Error, Result};

/// Pivots smaller than this are treated as zero; rounding noise in
/// near-dependent columns otherwise gets amplified into garbage.
const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// `minimize c·x` subject to `A_ub x <= b_ub`, `A_eq x = b_eq` and per-variable
/// bounds. Bounds default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless `status == Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs)
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::invalid_at("bounds length must equal variable count", "bounds"));
        }
        if self.a_ub.len() != self.b_ub.len() {
            return Err(Error::invalid_at("inequality rows and rhs differ in length", "b_ub"));
        }
        if self.a_eq.len() != self.b_eq.len() {
            return Err(Error::invalid_at("equality rows and rhs differ in length", "b_eq"));
        }
        for (name, rows) in [("a_ub", &self.a_ub), ("a_eq", &self.a_eq)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::invalid_at(
                        format!("constraint row has {} entries, expected {n}", row.len()),
                        format!("{name}[{i}]"),
                    ));
                }
                if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                    return Err(Error::invalid_at("constraint coefficient must be finite", format!("{name}[{i}][{j}]")));
                }
            }
        }
        for (name, rhs) in [("b_ub", &self.b_ub), ("b_eq", &self.b_eq)] {
            if let Some(i) = rhs.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid_at("right-hand side must be finite", format!("{name}[{i}]")));
            }
        }
        if let Some(j) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid_at("objective coefficient must be finite", format!("objective[{j}]")));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::invalid_at(format!("invalid bounds [{lo}, {hi}]"), format!("bounds[{j}]")));
            }
        }
        Ok(())
    }
}

/// x_j = offset + sum(coef * y_col) over nonnegative internal columns.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    Le,
    Eq,
}

struct Row {
    coeffs: Vec<f64>,
    kind: RowKind,
    rhs: f64,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;

    // Shift/split variables so that every internal column is >= 0.
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut ny = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        let map = match (lo.is_finite(), hi.is_finite()) {
            (true, _) => {
                if hi.is_finite() {
                    upper_rows.push((ny, hi - lo));
                }
                VarMap { offset: lo, terms: vec![(ny, 1.0)] }
            }
            (false, true) => VarMap { offset: hi, terms: vec![(ny, -1.0)] },
            (false, false) => {
                ny += 1;
                VarMap { offset: 0.0, terms: vec![(ny - 1, 1.0), (ny, -1.0)] }
            }
        };
        ny += 1;
        maps.push(map);
    }

    let translate = |row: &[f64], rhs: f64, kind: RowKind| -> Row {
        let mut coeffs = vec![0.0; ny];
        let mut rhs = rhs;
        for (a, map) in row.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            rhs -= a * map.offset;
            for &(col, c) in &map.terms {
                coeffs[col] += a * c;
            }
        }
        Row { coeffs, kind, rhs }
    };

    let mut rows: Vec<Row> = Vec::new();
    for (row, &rhs) in lp.a_ub.iter().zip(&lp.b_ub) {
        rows.push(translate(row, rhs, RowKind::Le));
    }
    for (row, &rhs) in lp.a_eq.iter().zip(&lp.b_eq) {
        rows.push(translate(row, rhs, RowKind::Eq));
    }
    for &(col, width) in &upper_rows {
        let mut coeffs = vec![0.0; ny];
        coeffs[col] = 1.0;
        rows.push(Row { coeffs, kind: RowKind::Le, rhs: width });
    }

    let mut cost = vec![0.0; ny];
    let mut cost_offset = 0.0;
    for (c, map) in lp.objective.iter().zip(&maps) {
        cost_offset += c * map.offset;
        for &(col, k) in &map.terms {
            cost[col] += c * k;
        }
    }

    let mut tableau = Tableau::build(&rows, ny);
    if !tableau.phase_one()? {
        return Ok(LpSolution { status: LpStatus::Infeasible, x: Vec::new(), objective_value: f64::NAN });
    }
    if !tableau.phase_two(&cost)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective_value: f64::NEG_INFINITY,
        });
    }

    let y = tableau.primal(ny);
    let x: Vec<f64> = maps
        .iter()
        .map(|m| m.offset + m.terms.iter().map(|&(col, c)| c * y[col]).sum::<f64>())
        .collect();
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    debug_assert!((objective_value - (cost_offset + cost.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>())).abs() < 1e-6);
    Ok(LpSolution { status: LpStatus::Optimal, x, objective_value })
}

struct Tableau {
    m: usize,
    /// Real columns (structural plus slack); artificials follow.
    n_real: usize,
    n_total: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    artificial_rows: Vec<usize>,
    scale: f64,
}

impl Tableau {
    fn build(rows: &[Row], ny: usize) -> Self {
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.kind == RowKind::Le).count();
        let n_real = ny + n_slack;

        // Rows that cannot start with a +1 slack in the basis get an artificial.
        let needs_art: Vec<bool> = rows
            .iter()
            .map(|r| r.kind == RowKind::Eq || r.rhs < 0.0)
            .collect();
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let n_total = n_real + n_art;
        let width = n_total + 1;

        let mut data = vec![0.0; m * width];
        let mut basis = vec![0usize; m];
        let mut artificial_rows = Vec::new();
        let mut slack_col = ny;
        let mut art_col = n_real;
        let mut scale = 1.0f64;
        for (i, row) in rows.iter().enumerate() {
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            let base = i * width;
            for (j, &a) in row.coeffs.iter().enumerate() {
                data[base + j] = sign * a;
            }
            data[base + n_total] = sign * row.rhs;
            scale = scale.max(row.rhs.abs());
            let mut slack_here = None;
            if row.kind == RowKind::Le {
                data[base + slack_col] = sign;
                slack_here = Some(slack_col);
                slack_col += 1;
            }
            if needs_art[i] {
                data[base + art_col] = 1.0;
                basis[i] = art_col;
                artificial_rows.push(i);
                art_col += 1;
            } else {
                basis[i] = slack_here.expect("slack column for <= row");
            }
        }
        Tableau {
            m,
            n_real,
            n_total,
            width,
            data,
            obj: vec![0.0; width],
            basis,
            artificial_rows,
            scale,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.n_total)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for k in 0..w {
            self.data[r * w + k] /= p;
        }
        self.data[r * w + c] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for chunk in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = chunk[c];
            if f != 0.0 {
                for k in 0..w {
                    chunk[k] -= f * prow[k];
                }
                chunk[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for k in 0..w {
                self.obj[k] -= f * prow[k];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Installs `cost` (indexed by column) as the objective row in reduced form.
    fn set_objective(&mut self, cost: &[f64]) {
        self.obj = vec![0.0; self.width];
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for k in 0..self.width {
                    self.obj[k] -= cb * self.data[i * self.width + k];
                }
            }
        }
    }

    /// Runs Bland's rule over columns `< allowed`; returns false on unboundedness.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -COST_EPS) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
        Err(Error::Numerical("simplex pivot limit reached".into()))
    }

    fn phase_one(&mut self) -> Result<bool> {
        if self.artificial_rows.is_empty() {
            return Ok(true);
        }
        let mut cost = vec![0.0; self.n_total];
        for c in cost.iter_mut().skip(self.n_real) {
            *c = 1.0;
        }
        self.set_objective(&cost);
        self.iterate(self.n_total)?;
        let infeasibility = -self.obj[self.n_total];
        if infeasibility > FEAS_EPS * self.scale {
            return Ok(false);
        }
        // Drive zero-level artificials out of the basis where possible; rows
        // with no real entry are redundant and stay inert.
        for i in 0..self.m {
            if self.basis[i] >= self.n_real {
                if let Some(j) = (0..self.n_real).find(|&j| self.at(i, j).abs() > 1e-9) {
                    self.pivot(i, j);
                }
            }
        }
        Ok(true)
    }

    fn phase_two(&mut self, cost: &[f64]) -> Result<bool> {
        let mut full = vec![0.0; self.n_total];
        full[..cost.len()].copy_from_slice(cost);
        self.set_objective(&full);
        self.iterate(self.n_real)
    }

    fn primal(&self, ny: usize) -> Vec<f64> {
        let mut y = vec![0.0; ny];
        for i in 0..self.m {
            if self.basis[i] < ny {
                y[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        y
    }
}
