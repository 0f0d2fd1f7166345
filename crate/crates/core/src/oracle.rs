//! Exact capacity regions by Fourier-Motzkin projection of the subtree-flow
//! polytope onto the session rates. Only practical for small instances, which
//! is all it is used for: an independent reference for the distance-function
//! descriptions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::japanese::Inequality;
use crate::lp::{LinearProgram, LinearSystem, LpOutcome, Relation};
use crate::network::Problem;
use crate::numerics::Rational;

pub const DEFAULT_ROW_CAP: usize = 50_000;

/// `coeffs . x <= rhs` with coprime integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionRow {
    pub coeffs: Vec<BigInt>,
    pub rhs: Rational,
}

impl RegionRow {
    fn rational_coeffs(&self) -> Vec<Rational> {
        self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect()
    }

    pub fn lhs_at(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| Rational::from_integer(c.clone()) * v)
            .sum()
    }
}

/// A polyhedron over labelled variables given by irredundant rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedRegion {
    pub labels: Vec<String>,
    pub rows: Vec<RegionRow>,
    /// Rows and variables of the system this region was projected from.
    pub source_rows: usize,
    pub source_vars: usize,
}

/// Integer-valued rational row scaled to coprime integers; `None` for a zero row.
fn primitive(a: &[Rational], b: &Rational) -> Option<FmRow> {
    if a.iter().all(|x| x.is_zero()) {
        return None;
    }
    let lcm = a.iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()));
    let ints: Vec<BigInt> = a.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let scale = Rational::new(lcm, gcd.clone()).expect("gcd of a nonzero row is positive");
    Some(FmRow {
        a: ints.iter().map(|x| Rational::from_integer(x / &gcd)).collect(),
        b: b * &scale,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct FmRow {
    a: Vec<Rational>,
    b: Rational,
}

impl ProjectedRegion {
    /// Builds a region from rows `a . x <= b`, normalizing and removing
    /// redundant rows. Zero rows are dropped, or make the region empty when
    /// their right-hand side is negative.
    pub fn from_rows(labels: Vec<String>, rows: &[(Vec<Rational>, Rational)]) -> Result<Self> {
        let n = labels.len();
        let mut set = RowSet::default();
        for (a, b) in rows {
            if a.len() != n {
                return Err(Error::Validation(format!(
                    "row has {} coefficients for {} variables",
                    a.len(),
                    n
                )));
            }
            set.insert(a, b);
        }
        let mut kept = set.finish(n);
        remove_redundant(&mut kept, &(0..n).collect::<Vec<_>>())?;
        Ok(ProjectedRegion {
            source_rows: rows.len(),
            source_vars: n,
            rows: to_region_rows(&kept, &(0..n).collect::<Vec<_>>()),
            labels,
        })
    }

    /// The region cut out by Japanese inequalities together with `R >= 0`.
    pub fn from_inequalities(labels: Vec<String>, inequalities: &[&Inequality]) -> Result<Self> {
        let n = labels.len();
        let mut rows: Vec<(Vec<Rational>, Rational)> = inequalities
            .iter()
            .map(|iq| (iq.coefficients.iter().map(Rational::from).collect(), iq.rhs.clone()))
            .collect();
        for i in 0..n {
            let mut a = vec![Rational::zero(); n];
            a[i] = -Rational::one();
            rows.push((a, Rational::zero()));
        }
        ProjectedRegion::from_rows(labels, &rows)
    }

    pub fn is_empty_region(&self) -> bool {
        self.rows.iter().any(|r| r.coeffs.iter().all(|c| c.is_zero()))
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|r| r.lhs_at(x) <= r.rhs)
    }

    fn program(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.labels.len());
        lp.set_all_free();
        for r in &self.rows {
            lp.add_constraint(r.rational_coeffs(), Relation::Le, r.rhs.clone());
        }
        lp
    }

    /// True iff `a . x <= b` holds on the whole region.
    pub fn implies(&self, a: &[Rational], b: &Rational) -> Result<bool> {
        let mut lp = self.program();
        lp.set_objective(a.to_vec());
        Ok(match lp.solve()? {
            LpOutcome::Optimal { value, .. } => value <= *b,
            LpOutcome::Infeasible(_) => true,
            LpOutcome::Unbounded => false,
        })
    }

    pub fn to_records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let mut coeffs = Map::new();
                for (label, c) in self.labels.iter().zip(&r.coeffs) {
                    if c.is_zero() {
                        continue;
                    }
                    let v = match c.to_i64() {
                        Some(x) => json!(x),
                        None => json!(c.to_string()),
                    };
                    coeffs.insert(label.clone(), v);
                }
                json!({
                    "source": "oracle",
                    "coefficients": Value::Object(coeffs),
                    "rhs": r.rhs.to_string(),
                })
            })
            .collect()
    }
}

/// Normalized rows keyed by coefficient vector, keeping the tightest rhs.
#[derive(Default)]
struct RowSet {
    rows: BTreeMap<Vec<Rational>, Rational>,
    infeasible: bool,
}

impl RowSet {
    fn insert(&mut self, a: &[Rational], b: &Rational) {
        match primitive(a, b) {
            None => {
                if b.is_negative() {
                    self.infeasible = true;
                }
            }
            Some(row) => {
                let slot = self.rows.entry(row.a).or_insert_with(|| row.b.clone());
                if row.b < *slot {
                    *slot = row.b;
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn finish(self, n: usize) -> Vec<FmRow> {
        if self.infeasible {
            return vec![FmRow {
                a: vec![Rational::zero(); n],
                b: -Rational::one(),
            }];
        }
        self.rows.into_iter().map(|(a, b)| FmRow { a, b }).collect()
    }
}

fn to_region_rows(rows: &[FmRow], keep: &[usize]) -> Vec<RegionRow> {
    let mut out: Vec<RegionRow> = rows
        .iter()
        .map(|r| RegionRow {
            coeffs: keep.iter().map(|&k| r.a[k].numer()).collect(),
            rhs: r.b.clone(),
        })
        .collect();
    out.sort();
    out
}

/// LP over the `active` columns with every row as `<=`. Columns bounded below
/// by zero through a single-coefficient row are declared nonnegative instead
/// of free, which halves the tableau width on flow systems.
fn active_program(rows: &[FmRow], active: &[usize], skip: Option<usize>) -> LinearProgram {
    let mut lp = LinearProgram::new(active.len());
    for (c, &col) in active.iter().enumerate() {
        let bounded = rows.iter().enumerate().any(|(i, r)| {
            Some(i) != skip
                && r.a[col].is_negative()
                && !r.b.is_positive()
                && active.iter().all(|&k| k == col || r.a[k].is_zero())
        });
        if !bounded {
            lp.set_free(c);
        }
    }
    for (i, r) in rows.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let terms: Vec<(usize, Rational)> = active
            .iter()
            .enumerate()
            .filter(|(_, &k)| !r.a[k].is_zero())
            .map(|(c, &k)| (c, r.a[k].clone()))
            .collect();
        lp.add_sparse(&terms, Relation::Le, r.b.clone());
    }
    lp
}

/// Drops rows implied by the others, one at a time, so the result is
/// irredundant. An infeasible system collapses to the single row `0 <= -1`.
fn remove_redundant(rows: &mut Vec<FmRow>, active: &[usize]) -> Result<()> {
    if rows.iter().any(|r| r.a.iter().all(|x| x.is_zero())) {
        let n = rows[0].a.len();
        rows.clear();
        rows.push(FmRow {
            a: vec![Rational::zero(); n],
            b: -Rational::one(),
        });
        return Ok(());
    }
    if let LpOutcome::Infeasible(_) = active_program(rows, active, None).solve()? {
        let n = rows.first().map_or(0, |r| r.a.len());
        rows.clear();
        rows.push(FmRow {
            a: vec![Rational::zero(); n],
            b: -Rational::one(),
        });
        return Ok(());
    }
    let mut i = 0;
    while i < rows.len() {
        let mut lp = active_program(rows, active, Some(i));
        lp.set_objective(active.iter().map(|&k| rows[i].a[k].clone()).collect());
        let redundant = match lp.solve()? {
            LpOutcome::Optimal { value, .. } => value <= rows[i].b,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible(_) => {
                return Err(Error::Internal("subsystem of a feasible system is infeasible".into()))
            }
        };
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(())
}

/// Eliminates `var` from `rows` using the equality `eq` (`eq.a[var] != 0`).
fn substitute(rows: &[FmRow], eq: &FmRow, var: usize) -> RowSet {
    let mut set = RowSet::default();
    for r in rows {
        if r.a[var].is_zero() {
            set.insert(&r.a, &r.b);
            continue;
        }
        let t = &r.a[var] / &eq.a[var];
        let a: Vec<Rational> = r.a.iter().zip(&eq.a).map(|(x, y)| x - &(&t * y)).collect();
        let b = &r.b - &(&t * &eq.b);
        set.insert(&a, &b);
    }
    set
}

/// An equality `a . x = b` encoded as two opposite rows that involves a
/// variable still to be eliminated.
fn find_equality(rows: &[FmRow], eliminate: &[bool]) -> Option<(usize, usize, usize)> {
    let index: BTreeMap<&[Rational], usize> = rows.iter().enumerate().map(|(i, r)| (&r.a[..], i)).collect();
    for (i, r) in rows.iter().enumerate() {
        let neg: Vec<Rational> = r.a.iter().map(|x| -x).collect();
        if let Some(&j) = index.get(&neg[..]) {
            if r.b != -&rows[j].b {
                continue;
            }
            if let Some(var) = (0..r.a.len()).find(|&k| eliminate[k] && !r.a[k].is_zero()) {
                return Some((i, j, var));
            }
        }
    }
    None
}

/// Projects the solution set of `sys` onto the variables in `keep`.
pub fn fm_project(sys: &LinearSystem, keep: &[usize], row_cap: usize) -> Result<ProjectedRegion> {
    sys.validate()?;
    let n = sys.num_vars();
    if let Some(&k) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidArgument(format!("kept variable {k} out of range")));
    }
    let mut eliminate = vec![true; n];
    for &k in keep {
        eliminate[k] = false;
    }
    let mut set = RowSet::default();
    for (a, b) in sys.matrix.iter().zip(&sys.rhs) {
        set.insert(a, b);
    }
    let mut rows = set.finish(n);

    while let Some((i, j, var)) = find_equality(&rows, &eliminate) {
        let eq = rows[i].clone();
        let rest: Vec<FmRow> = rows
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, r)| r.clone())
            .collect();
        rows = substitute(&rest, &eq, var).finish(n);
        eliminate[var] = false;
    }

    let mut remaining: Vec<usize> = (0..n).filter(|&k| eliminate[k]).collect();
    let live = |remaining: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = keep.to_vec();
        v.extend_from_slice(remaining);
        v.sort_unstable();
        v
    };
    remove_redundant(&mut rows, &live(&remaining))?;

    while !remaining.is_empty() {
        let (pos, var) = remaining
            .iter()
            .enumerate()
            .map(|(p, &v)| {
                let up = rows.iter().filter(|r| r.a[v].is_positive()).count();
                let down = rows.iter().filter(|r| r.a[v].is_negative()).count();
                ((up * down) as isize - (up + down) as isize, p, v)
            })
            .min()
            .map(|(_, p, v)| (p, v))
            .expect("remaining is nonempty");
        remaining.remove(pos);

        let mut set = RowSet::default();
        let (mut up, mut down) = (Vec::new(), Vec::new());
        for r in &rows {
            if r.a[var].is_positive() {
                up.push(r);
            } else if r.a[var].is_negative() {
                down.push(r);
            } else {
                set.insert(&r.a, &r.b);
            }
        }
        for p in &up {
            for q in &down {
                let (s, t) = (-&q.a[var], p.a[var].clone());
                let a: Vec<Rational> = p.a.iter().zip(&q.a).map(|(x, y)| &(&s * x) + &(&t * y)).collect();
                let b = &(&s * &p.b) + &(&t * &q.b);
                set.insert(&a, &b);
                if set.len() > row_cap {
                    return Err(Error::Resource(format!(
                        "Fourier-Motzkin intermediate system exceeds {row_cap} rows"
                    )));
                }
            }
        }
        rows = set.finish(n);
        remove_redundant(&mut rows, &live(&remaining))?;
    }

    Ok(ProjectedRegion {
        labels: keep.iter().map(|&k| sys.labels[k].clone()).collect(),
        rows: to_region_rows(&rows, keep),
        source_rows: sys.num_rows(),
        source_vars: n,
    })
}

/// Flow system over `{r_M^j} u {R_M}`: each session's flows sum to its rate,
/// edge loads stay within capacity, flows are nonnegative. Returns the system
/// and the indices of the rate variables.
pub fn flow_system(problem: &Problem) -> (LinearSystem, Vec<usize>) {
    let mut labels = Vec::new();
    let mut column = Vec::new();
    for (i, trees) in problem.subtrees.iter().enumerate() {
        for (j, t) in trees.iter().enumerate() {
            labels.push(format!("r[{}]{}", problem.sessions[i].id, t));
            column.push((i, j));
        }
    }
    let first_rate = labels.len();
    labels.extend(problem.sessions.iter().map(|s| s.id.clone()));
    let n = labels.len();
    let mut sys = LinearSystem::new(labels);
    for i in 0..problem.session_count() {
        let mut row = vec![Rational::zero(); n];
        for (c, &(s, _)) in column.iter().enumerate() {
            if s == i {
                row[c] = Rational::one();
            }
        }
        row[first_rate + i] = -Rational::one();
        let neg: Vec<Rational> = row.iter().map(|x| -x).collect();
        sys.push(row, Rational::zero());
        sys.push(neg, Rational::zero());
    }
    for e in &problem.network.edges {
        let mut row = vec![Rational::zero(); n];
        for (c, &(s, j)) in column.iter().enumerate() {
            if problem.subtrees[s][j].contains(e.id) {
                row[c] = Rational::one();
            }
        }
        sys.push(row, e.capacity.clone());
    }
    for c in 0..column.len() {
        let mut row = vec![Rational::zero(); n];
        row[c] = -Rational::one();
        sys.push(row, Rational::zero());
    }
    let keep = (first_rate..n).collect();
    (sys, keep)
}

/// Exact capacity region of the problem, over its session rates.
pub fn region_from_network(problem: &Problem, row_cap: usize) -> Result<ProjectedRegion> {
    let (sys, keep) = flow_system(problem);
    fm_project(&sys, &keep, row_cap)
}

/// True iff both regions are the same polyhedron.
pub fn same_region(a: &ProjectedRegion, b: &ProjectedRegion) -> Result<bool> {
    if a.labels != b.labels {
        return Err(Error::InvalidArgument("regions are over different variables".into()));
    }
    for (x, y) in [(a, b), (b, a)] {
        for r in &x.rows {
            if !y.implies(&r.rational_coeffs(), &r.rhs)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Compares a projected region with the region cut out by a set of
/// inequalities over the same sessions, intersected with `R >= 0`.
pub fn regions_equal(a: &ProjectedRegion, b: &[&Inequality]) -> Result<bool> {
    let other = ProjectedRegion::from_inequalities(a.labels.clone(), b)?;
    same_region(a, &other)
}
