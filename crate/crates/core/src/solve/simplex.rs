//! Exact two-phase primal simplex over arbitrary-precision rationals.
//!
//! Bland's anti-cycling rule (smallest eligible index enters, smallest basis
//! index breaks ratio ties) guarantees finite termination, so no tolerances
//! or perturbations appear anywhere. All variables are implicitly
//! nonnegative; rows may be <=, >=, or =.

use num_traits::{One, Signed, Zero};

use crate::rat::Rat;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    /// Sparse coefficients (variable index, value); duplicate indices are
    /// accumulated.
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    /// Dense maximization objective over the structural variables.
    pub objective: Vec<Rat>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: Rat,
    pub point: Vec<Rat>,
    pub pivots: u64,
}

struct Tableau {
    ncols: usize,
    rows: Vec<Vec<Rat>>, // each of length ncols + 1, rhs last
    basis: Vec<usize>,
    zrow: Vec<Rat>, // z_j - c_j per column, objective value in the rhs slot
    pivots: u64,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.rows[r][self.ncols]
    }

    fn rebuild_zrow(&mut self, cost: &[Rat]) {
        let mut z = vec![Rat::zero(); self.ncols + 1];
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.ncols {
                if !row[j].is_zero() {
                    z[j] += cb * &row[j];
                }
            }
        }
        for j in 0..self.ncols {
            z[j] -= &cost[j];
        }
        self.zrow = z;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        debug_assert!(!piv.is_zero(), "pivot on zero entry");
        if !piv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for j in 0..=self.ncols {
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    self.rows[i][j] -= delta;
                }
            }
        }
        if !self.zrow[c].is_zero() {
            let factor = self.zrow[c].clone();
            for j in 0..=self.ncols {
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    self.zrow[j] -= delta;
                }
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs simplex iterations to optimality under the current zrow.
    fn optimize(&mut self) -> Result<()> {
        loop {
            // Bland: smallest column with negative reduced-cost slot enters.
            let entering = (0..self.ncols).find(|&j| self.zrow[j].is_negative());
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][c].is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / &self.rows[r][c];
                match &leave {
                    None => leave = Some((r, ratio)),
                    Some((br, best)) => {
                        if ratio < *best || (ratio == *best && self.basis[r] < self.basis[*br]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::invalid(
                    "linear program is unbounded (not expected for these polytopes)",
                ));
            };
            self.pivot(r, c);
        }
    }
}

/// Maximizes the objective; exact rational arithmetic throughout. The
/// returned point is a basic feasible solution, i.e. a vertex of the
/// feasible polyhedron.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    assert_eq!(lp.objective.len(), lp.n_vars, "objective length mismatch");
    let n = lp.n_vars;
    let m = lp.rows.len();

    // Densify rows, normalize to rhs >= 0, classify relations.
    let mut dense: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rels: Vec<Rel> = Vec::with_capacity(m);
    let mut rhss: Vec<Rat> = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut d = vec![Rat::zero(); n];
        for (j, v) in &row.coeffs {
            assert!(*j < n, "coefficient index out of range");
            d[*j] += v;
        }
        let mut rel = row.rel;
        let mut rhs = row.rhs.clone();
        if rhs.is_negative() {
            for x in d.iter_mut() {
                if !x.is_zero() {
                    *x = -x.clone();
                }
            }
            rhs = -rhs;
            rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
        dense.push(d);
        rels.push(rel);
        rhss.push(rhs);
    }

    // Column layout: structural, then one slack/surplus per inequality,
    // then one artificial per >= or = row.
    let n_slack = rels.iter().filter(|r| !matches!(r, Rel::Eq)).count();
    let n_art = rels.iter().filter(|r| !matches!(r, Rel::Le)).count();
    let art_start = n + n_slack;
    let ncols = art_start + n_art;

    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = n;
    let mut art_at = art_start;
    for r in 0..m {
        let mut full = vec![Rat::zero(); ncols + 1];
        full[..n].clone_from_slice(&dense[r]);
        full[ncols] = rhss[r].clone();
        match rels[r] {
            Rel::Le => {
                full[slack_at] = Rat::one();
                basis.push(slack_at);
                slack_at += 1;
            }
            Rel::Ge => {
                full[slack_at] = -Rat::one();
                slack_at += 1;
                full[art_at] = Rat::one();
                basis.push(art_at);
                art_at += 1;
            }
            Rel::Eq => {
                full[art_at] = Rat::one();
                basis.push(art_at);
                art_at += 1;
            }
        }
        rows.push(full);
    }

    let mut t = Tableau {
        ncols,
        rows,
        basis,
        zrow: Vec::new(),
        pivots: 0,
    };

    // Phase 1: maximize minus the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![Rat::zero(); ncols];
        for j in art_start..ncols {
            cost[j] = -Rat::one();
        }
        t.rebuild_zrow(&cost);
        t.optimize()?;
        if t.zrow[t.ncols].is_negative() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: Rat::zero(),
                point: vec![Rat::zero(); n],
                pivots: t.pivots,
            });
        }
        // Drive artificials out of the basis; rows that cannot pivot on any
        // real column are redundant and get dropped.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                debug_assert!(t.rhs(r).is_zero(), "basic artificial at nonzero value");
                if let Some(c) = (0..art_start).find(|&c| !t.rows[r][c].is_zero()) {
                    t.pivot(r, c);
                } else {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
        // Discard the artificial columns entirely.
        for row in t.rows.iter_mut() {
            let rhs = row[ncols].clone();
            row.truncate(art_start);
            row.push(rhs);
        }
        t.ncols = art_start;
    }

    // Phase 2: the real objective (zero on slack columns).
    let mut cost = vec![Rat::zero(); t.ncols];
    cost[..n].clone_from_slice(&lp.objective);
    t.rebuild_zrow(&cost);
    t.optimize()?;

    let mut point = vec![Rat::zero(); n];
    for r in 0..t.rows.len() {
        if t.basis[r] < n {
            point[t.basis[r]] = t.rhs(r).clone();
        }
    }
    let objective = lp
        .objective
        .iter()
        .zip(&point)
        .fold(Rat::zero(), |acc, (c, x)| acc + c * x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        point,
        pivots: t.pivots,
    })
}
