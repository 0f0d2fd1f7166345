//! Exact two-phase tableau simplex over [`Rational`].
//!
//! Entering columns follow the largest-coefficient rule and switch to Bland's
//! rule for the rest of a phase once a run of degenerate pivots is observed,
//! which rules out cycling. Infeasible programs come with a Farkas certificate
//! read off the phase-one reduced costs.

use crate::error::{Error, Result};
use crate::numerics::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective . x` subject to the constraints, with `x_j >= 0`
/// unless variable `j` is marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    constraints: Vec<Constraint>,
    objective: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible(FarkasCertificate),
    Unbounded,
}

/// Multipliers `y`, one per constraint, with `y >= 0` on `<=` rows, `y <= 0` on
/// `>=` rows, `y^T A >= 0` on nonnegative variables, `y^T A = 0` on free ones
/// and `y^T b < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            constraints: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn set_all_free(&mut self) {
        self.free.iter_mut().for_each(|f| *f = true);
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.free[var]
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds a constraint given as sparse `(variable, coefficient)` terms.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self).run(self)
    }

    /// True iff `x` satisfies every constraint and sign restriction.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        if (0..self.num_vars).any(|j| !self.free[j] && x[j].is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c
                .coeffs
                .iter()
                .zip(x)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, v)| a * v)
                .sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }
}

impl FarkasCertificate {
    /// Re-checks the certificate against `lp` using only the constraint data.
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        let cons = lp.constraints();
        if self.multipliers.len() != cons.len() {
            return false;
        }
        for (y, c) in self.multipliers.iter().zip(cons) {
            let ok = match c.relation {
                Relation::Le => !y.is_negative(),
                Relation::Ge => !y.is_positive(),
                Relation::Eq => true,
            };
            if !ok {
                return false;
            }
        }
        for j in 0..lp.num_vars() {
            let combo: Rational = self
                .multipliers
                .iter()
                .zip(cons)
                .filter(|(y, c)| !y.is_zero() && !c.coeffs[j].is_zero())
                .map(|(y, c)| y * &c.coeffs[j])
                .sum();
            if lp.is_free(j) {
                if !combo.is_zero() {
                    return false;
                }
            } else if combo.is_negative() {
                return false;
            }
        }
        let yb: Rational = self
            .multipliers
            .iter()
            .zip(cons)
            .map(|(y, c)| y * &c.rhs)
            .sum();
        yb.is_negative()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// For each original constraint: (standardized sign, identity column, column
    /// coefficient of that identity column, is_artificial).
    row_info: Vec<(bool, usize, i8)>,
    /// Column pair for each original variable (positive part, negative part if free).
    var_cols: Vec<(usize, Option<usize>)>,
    active: Vec<bool>,
}

const DEGENERATE_RUN: usize = 32;

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut var_cols = Vec::with_capacity(lp.num_vars);
        let mut kinds = Vec::new();
        for j in 0..lp.num_vars {
            let pos = kinds.len();
            kinds.push(ColKind::Structural);
            let neg = if lp.free[j] {
                kinds.push(ColKind::Structural);
                Some(pos + 1)
            } else {
                None
            };
            var_cols.push((pos, neg));
        }
        // Standardize: rhs >= 0.
        let m = lp.constraints.len();
        let mut flipped = Vec::with_capacity(m);
        let mut rels = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            flipped.push(flip);
            rels.push(match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            });
        }
        let mut identity = Vec::with_capacity(m);
        let mut slack_cols = Vec::with_capacity(m);
        for rel in &rels {
            match rel {
                Relation::Le => {
                    let s = kinds.len();
                    kinds.push(ColKind::Slack);
                    slack_cols.push(Some((s, 1i8)));
                    identity.push((s, 1i8));
                }
                Relation::Ge => {
                    let s = kinds.len();
                    kinds.push(ColKind::Slack);
                    let a = kinds.len();
                    kinds.push(ColKind::Artificial);
                    slack_cols.push(Some((s, -1i8)));
                    identity.push((a, 1i8));
                }
                Relation::Eq => {
                    let a = kinds.len();
                    kinds.push(ColKind::Artificial);
                    slack_cols.push(None);
                    identity.push((a, 1i8));
                }
            }
        }
        let width = kinds.len() + 1;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut row_info = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            let sign = if flipped[i] { -1 } else { 1 };
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let a = if sign < 0 { -a } else { a.clone() };
                let (p, n) = var_cols[j];
                if let Some(n) = n {
                    row[n] = -&a;
                }
                row[p] = a;
            }
            if let Some((s, coef)) = slack_cols[i] {
                row[s] = Rational::from(coef as i64);
            }
            let (idc, _) = identity[i];
            row[idc] = Rational::one();
            row[width - 1] = if sign < 0 { -&c.rhs } else { c.rhs.clone() };
            rows.push(row);
            basis.push(idc);
            row_info.push((flipped[i], idc, if kinds[idc] == ColKind::Artificial { 1 } else { 0 }));
        }
        let active = vec![true; m];
        Tableau {
            rows,
            basis,
            kinds,
            row_info,
            var_cols,
            active,
        }
    }

    fn width(&self) -> usize {
        self.kinds.len() + 1
    }

    fn pivot(&mut self, z: &mut [Rational], pr: usize, pc: usize) {
        let w = self.width();
        let inv = self.rows[pr][pc].recip().expect("pivot on zero");
        if inv != Rational::one() {
            for v in self.rows[pr].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..w).filter(|&j| !self.rows[pr][j].is_zero()).collect();
        let prow = self.rows[pr].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for &j in &nz {
                row[j].sub_mul_assign(&factor, &prow[j]);
            }
        }
        if !z[pc].is_zero() {
            let factor = z[pc].clone();
            for &j in &nz {
                z[j].sub_mul_assign(&factor, &prow[j]);
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the objective whose reduced-cost row is `z` (last entry holds
    /// minus the objective value). Returns false if unbounded.
    fn optimize(&mut self, z: &mut [Rational], allowed: &dyn Fn(usize) -> bool) -> bool {
        let w = self.width();
        let rhs = w - 1;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..rhs).find(|&j| allowed(j) && z[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..rhs {
                    if allowed(j) && z[j].is_negative() {
                        match best {
                            Some(b) if z[j] >= z[b] => {}
                            _ => best = Some(j),
                        }
                    }
                }
                best
            };
            let Some(pc) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if !self.active[i] || !self.rows[i][pc].is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][rhs] / &self.rows[i][pc];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((pr, ratio)) = leave else {
                return false;
            };
            if ratio.is_zero() {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(z, pr, pc);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        let w = self.width();
        let rhs = w - 1;
        let has_artificial = self.kinds.contains(&ColKind::Artificial);
        if has_artificial {
            // Phase one: minimize the sum of artificials.
            let mut z = vec![Rational::zero(); w];
            for (j, k) in self.kinds.iter().enumerate() {
                if *k == ColKind::Artificial {
                    z[j] = Rational::one();
                }
            }
            for i in 0..self.rows.len() {
                if self.kinds[self.basis[i]] == ColKind::Artificial {
                    for j in 0..w {
                        if !self.rows[i][j].is_zero() {
                            let v = self.rows[i][j].clone();
                            z[j] -= &v;
                        }
                    }
                }
            }
            let bounded = self.optimize(&mut z, &|_| true);
            if !bounded {
                return Err(Error::Internal("phase one reported unbounded".into()));
            }
            let infeasibility = -&z[rhs];
            if infeasibility.is_positive() {
                return Ok(LpOutcome::Infeasible(self.certificate(&z)));
            }
            self.drive_out_artificials();
        }
        // Phase two: minimize -objective.
        let mut z = vec![Rational::zero(); w];
        for (j, c) in lp.objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (p, n) = self.var_cols[j];
            z[p] = -c;
            if let Some(n) = n {
                z[n] = c.clone();
            }
        }
        for i in 0..self.rows.len() {
            if !self.active[i] {
                continue;
            }
            let cb = z[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                if !self.rows[i][j].is_zero() {
                    let v = &cb * &self.rows[i][j];
                    z[j] -= &v;
                }
            }
        }
        let kinds = self.kinds.clone();
        let bounded = self.optimize(&mut z, &|j| kinds[j] != ColKind::Artificial);
        if !bounded {
            return Ok(LpOutcome::Unbounded);
        }
        let mut colval = vec![Rational::zero(); w - 1];
        for i in 0..self.rows.len() {
            if self.active[i] {
                colval[self.basis[i]] = self.rows[i][rhs].clone();
            }
        }
        let x: Vec<Rational> = self
            .var_cols
            .iter()
            .map(|&(p, n)| match n {
                Some(n) => &colval[p] - &colval[n],
                None => colval[p].clone(),
            })
            .collect();
        let value = lp
            .objective
            .iter()
            .zip(&x)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .sum();
        Ok(LpOutcome::Optimal { x, value })
    }

    fn certificate(&self, z: &[Rational]) -> FarkasCertificate {
        // Reduced cost of an identity column e_i is c_j - pi_i; pi gives the
        // phase-one dual, and y = -pi (undoing the row sign flip) certifies.
        let multipliers = self
            .row_info
            .iter()
            .map(|&(flipped, col, art_cost)| {
                let pi = Rational::from(art_cost as i64) - &z[col];
                let y = -pi;
                if flipped {
                    -y
                } else {
                    y
                }
            })
            .collect();
        FarkasCertificate { multipliers }
    }

    fn drive_out_artificials(&mut self) {
        let rhs = self.width() - 1;
        for i in 0..self.rows.len() {
            if self.kinds[self.basis[i]] != ColKind::Artificial {
                continue;
            }
            let col = (0..rhs)
                .find(|&j| self.kinds[j] != ColKind::Artificial && !self.rows[i][j].is_zero());
            match col {
                Some(pc) => {
                    let mut dummy = vec![Rational::zero(); self.width()];
                    self.pivot(&mut dummy, i, pc);
                }
                None => self.active[i] = false,
            }
        }
    }
}

/// A system `A x <= b` with labelled variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub labels: Vec<String>,
}

impl LinearSystem {
    pub fn new(labels: Vec<String>) -> Self {
        LinearSystem {
            matrix: Vec::new(),
            rhs: Vec::new(),
            labels,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn push(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.labels.len());
        self.matrix.push(row);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.len() != self.rhs.len() {
            return Err(Error::Validation("row count and rhs length differ".into()));
        }
        if self.matrix.iter().any(|r| r.len() != self.labels.len()) {
            return Err(Error::Validation("row width differs from label count".into()));
        }
        Ok(())
    }

    /// LP with free variables and every row as a `<=` constraint.
    pub fn to_program(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.num_vars());
        lp.set_all_free();
        for (row, b) in self.matrix.iter().zip(&self.rhs) {
            lp.add_constraint(row.clone(), Relation::Le, b.clone());
        }
        lp
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.matrix.iter().zip(&self.rhs).all(|(row, b)| {
            let lhs: Rational = row
                .iter()
                .zip(x)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, v)| a * v)
                .sum();
            lhs <= *b
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn maximizes_simple_program() {
        // max x + y, x + 2y <= 4, 3x + y <= 6
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(1)]);
        lp.add_constraint(vec![r(1), r(2)], Relation::Le, r(4));
        lp.add_constraint(vec![r(3), r(1)], Relation::Le, r(6));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, "14/5".parse().unwrap());
                assert!(lp.is_feasible_point(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_program_has_checked_certificate() {
        // x + y = 3, x <= 1, y <= 1
        let mut lp = LinearProgram::new(2);
        lp.add_constraint(vec![r(1), r(1)], Relation::Eq, r(3));
        lp.add_constraint(vec![r(1), r(0)], Relation::Le, r(1));
        lp.add_constraint(vec![r(0), r(1)], Relation::Le, r(1));
        match lp.solve().unwrap() {
            LpOutcome::Infeasible(cert) => assert!(cert.verify(&lp)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_free_variables() {
        // free x: x >= -5 (as -x <= 5), minimize x => max -x
        let mut lp = LinearProgram::new(1);
        lp.set_free(0);
        lp.set_objective(vec![r(-1)]);
        lp.add_constraint(vec![r(1)], Relation::Ge, r(-5));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x[0], r(-5)),
            other => panic!("{other:?}"),
        }
        // infeasible with a free variable: x <= -1 and x >= 1
        let mut lp = LinearProgram::new(1);
        lp.set_free(0);
        lp.add_constraint(vec![r(1)], Relation::Le, r(-1));
        lp.add_constraint(vec![r(1)], Relation::Ge, r(1));
        match lp.solve().unwrap() {
            LpOutcome::Infeasible(cert) => assert!(cert.verify(&lp)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(0)]);
        lp.add_constraint(vec![r(-1), r(1)], Relation::Le, r(1));
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(2)]);
        lp.add_constraint(vec![r(1), r(1)], Relation::Eq, r(2));
        lp.add_constraint(vec![r(2), r(2)], Relation::Eq, r(4));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, r(4));
                assert_eq!(x, vec![r(0), r(2)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bogus_certificate_is_rejected() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![r(1)], Relation::Le, r(1));
        let cert = FarkasCertificate {
            multipliers: vec![r(-1)],
        };
        assert!(!cert.verify(&lp));
    }
}
