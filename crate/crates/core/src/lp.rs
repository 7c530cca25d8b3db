//! Exact rational linear programs and a two-phase simplex solver.
//!
//! The solver works on a dense tableau over [`Rat`] and pivots with Bland's
//! rule, so it always terminates and returns the same basis for the same
//! input. Row operations skip zero entries of the pivot row, which keeps the
//! cost proportional to the fill-in on the sparse LPs built by the
//! scheduling modules.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    /// `None` means unbounded below.
    pub lower: Option<Rat>,
    pub upper: Option<Rat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, Rat)>,
    pub relation: Relation,
    pub rhs: Rat,
}

/// `min objective . x` subject to linear constraints and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub objective: Vec<(VarId, Rat)>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with lower bound 0 and no upper bound.
    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var_bounded(name, Some(Rat::zero()), None)
    }

    pub fn add_var_bounded(&mut self, name: impl Into<String>, lower: Option<Rat>, upper: Option<Rat>) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn set_objective(&mut self, var: VarId, coeff: Rat) {
        self.objective.retain(|(v, _)| *v != var);
        if !coeff.is_zero() {
            self.objective.push((var, coeff));
        }
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, Rat)>,
        relation: Relation,
        rhs: Rat,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.variables[v.0].name
    }

    fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for (v, _) in &self.objective {
            if v.0 >= n {
                return Err(Error::MalformedLp(format!("objective references undeclared variable #{}", v.0)));
            }
        }
        for c in &self.constraints {
            if let Some((v, _)) = c.coeffs.iter().find(|(v, _)| v.0 >= n) {
                return Err(Error::MalformedLp(format!(
                    "constraint {:?} references undeclared variable #{}",
                    c.name, v.0
                )));
            }
        }
        for var in &self.variables {
            if let (Some(l), Some(u)) = (&var.lower, &var.upper) {
                if l > u {
                    return Err(Error::MalformedLp(format!("variable {:?} has lower > upper", var.name)));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[Rat]) -> Rat {
        self.objective
            .iter()
            .fold(Rat::zero(), |acc, (v, c)| acc + c * &values[v.0])
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |v: &VarId, c: &Rat| format!("{} {}", c, self.variables[v.0].name);
        let obj: Vec<String> = self.objective.iter().map(|(v, c)| term(v, c)).collect();
        writeln!(f, "min {}", if obj.is_empty() { "0".into() } else { obj.join(" + ") })?;
        writeln!(f, "subject to")?;
        for c in &self.constraints {
            let lhs: Vec<String> = c.coeffs.iter().map(|(v, a)| term(v, a)).collect();
            writeln!(f, "  {}: {} {} {}", c.name, lhs.join(" + "), c.relation, c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for v in &self.variables {
            let lo = v.lower.as_ref().map_or("-inf".to_string(), |l| l.to_string());
            let hi = v.upper.as_ref().map_or("+inf".to_string(), |u| u.to_string());
            writeln!(f, "  {} <= {} <= {}", lo, v.name, hi)?;
        }
        Ok(())
    }
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
    /// One value per declared variable (empty unless optimal).
    pub values: Vec<Rat>,
    pub objective_value: Rat,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, v: VarId) -> &Rat {
        &self.values[v.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub name: String,
    /// Negative for a violated inequality; nonzero for a violated equality.
    pub slack: Rat,
}

/// Exact slack of every constraint and bound; only violated ones are
/// returned.
pub fn check_point(lp: &LinearProgram, values: &[Rat]) -> Result<Vec<Violation>> {
    lp.validate()?;
    if values.len() < lp.variables.len() {
        return Err(Error::MissingValue(lp.variables[values.len()].name.clone()));
    }
    let mut out = Vec::new();
    for c in &lp.constraints {
        let lhs = c
            .coeffs
            .iter()
            .fold(Rat::zero(), |acc, (v, a)| acc + a * &values[v.0]);
        let slack = match c.relation {
            Relation::Le | Relation::Eq => &c.rhs - &lhs,
            Relation::Ge => &lhs - &c.rhs,
        };
        let violated = match c.relation {
            Relation::Eq => !slack.is_zero(),
            _ => slack.is_negative(),
        };
        if violated {
            out.push(Violation {
                name: c.name.clone(),
                slack,
            });
        }
    }
    for (var, x) in lp.variables.iter().zip(values) {
        if let Some(l) = &var.lower {
            if x < l {
                out.push(Violation {
                    name: format!("lower bound of {}", var.name),
                    slack: x - l,
                });
            }
        }
        if let Some(u) = &var.upper {
            if x > u {
                out.push(Violation {
                    name: format!("upper bound of {}", var.name),
                    slack: u - x,
                });
            }
        }
    }
    Ok(out)
}

/// How a declared variable maps onto nonnegative tableau columns.
enum Column {
    /// x = offset + col
    Shifted { col: usize, offset: Rat },
    /// x = offset - col
    Mirrored { col: usize, offset: Rat },
    /// x = plus - minus
    Split { plus: usize, minus: usize },
}

struct Row {
    coeffs: Vec<(usize, Rat)>,
    relation: Relation,
    rhs: Rat,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    enterable: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [Rat], cost_value: &mut Rat) {
        let inv = Rat::one() / &self.rows[r][c];
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        for &j in &nz {
            self.rows[r][j] *= &inv;
        }
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] -= &factor * &pivot_row[j];
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !cost[c].is_zero() {
            let factor = cost[c].clone();
            for &j in &nz {
                cost[j] -= &factor * &pivot_row[j];
            }
            *cost_value -= &factor * &pivot_rhs;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Minimizes the objective whose reduced costs are in `cost`
    /// (`cost_value` holds minus the current objective). Returns false when
    /// unbounded.
    fn optimize(&mut self, cost: &mut [Rat], cost_value: &mut Rat) -> bool {
        loop {
            // Bland: lowest-index improving column.
            let Some(c) = (0..cost.len()).find(|&j| self.enterable[j] && cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c, cost, cost_value);
        }
    }
}

/// Solves `lp` exactly. Malformed programs are errors; infeasible and
/// unbounded programs are reported through [`LpSolution::status`].
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;

    // Map declared variables onto nonnegative columns.
    let mut columns = Vec::with_capacity(lp.variables.len());
    let mut ncols = 0usize;
    let mut bound_rows: Vec<Row> = Vec::new();
    for var in &lp.variables {
        match (&var.lower, &var.upper) {
            (Some(l), upper) => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = upper {
                    bound_rows.push(Row {
                        coeffs: vec![(col, Rat::one())],
                        relation: Relation::Le,
                        rhs: u - l,
                    });
                }
                columns.push(Column::Shifted { col, offset: l.clone() });
            }
            (None, Some(u)) => {
                columns.push(Column::Mirrored {
                    col: ncols,
                    offset: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                columns.push(Column::Split {
                    plus: ncols,
                    minus: ncols + 1,
                });
                ncols += 2;
            }
        }
    }

    let substitute = |coeffs: &[(VarId, Rat)]| -> (Vec<(usize, Rat)>, Rat) {
        let mut dense: Vec<Rat> = vec![Rat::zero(); ncols];
        let mut constant = Rat::zero();
        for (v, a) in coeffs {
            match &columns[v.0] {
                Column::Shifted { col, offset } => {
                    dense[*col] += a;
                    constant += a * offset;
                }
                Column::Mirrored { col, offset } => {
                    dense[*col] -= a;
                    constant += a * offset;
                }
                Column::Split { plus, minus } => {
                    dense[*plus] += a;
                    dense[*minus] -= a;
                }
            }
        }
        let sparse = dense
            .into_iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .collect();
        (sparse, constant)
    };

    let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints.len() + bound_rows.len());
    for c in &lp.constraints {
        let (coeffs, constant) = substitute(&c.coeffs);
        rows.push(Row {
            coeffs,
            relation: c.relation,
            rhs: &c.rhs - constant,
        });
    }
    rows.extend(bound_rows);
    let (obj_coeffs, obj_constant) = substitute(&lp.objective);

    // Normalize to nonnegative right-hand sides.
    for row in &mut rows {
        if row.rhs.is_negative() {
            row.rhs = -&row.rhs;
            for (_, a) in &mut row.coeffs {
                *a = -&*a;
            }
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let nslack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let nart = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let width = ncols + nslack + nart;
    let first_art = ncols + nslack;

    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        enterable: vec![true; width],
    };
    let (mut next_slack, mut next_art) = (ncols, first_art);
    for row in &rows {
        let mut dense = vec![Rat::zero(); width];
        for (j, a) in &row.coeffs {
            dense[*j] = a.clone();
        }
        let basic = match row.relation {
            Relation::Le => {
                dense[next_slack] = Rat::one();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                dense[next_slack] = -Rat::one();
                next_slack += 1;
                dense[next_art] = Rat::one();
                next_art += 1;
                next_art - 1
            }
            Relation::Eq => {
                dense[next_art] = Rat::one();
                next_art += 1;
                next_art - 1
            }
        };
        tab.rows.push(dense);
        tab.rhs.push(row.rhs.clone());
        tab.basis.push(basic);
    }

    // Phase 1: minimize the sum of artificials.
    if nart > 0 {
        let mut cost = vec![Rat::zero(); width];
        let mut cost_value = Rat::zero();
        for j in first_art..width {
            cost[j] = Rat::one();
        }
        for i in 0..tab.rows.len() {
            if tab.basis[i] >= first_art {
                for j in 0..width {
                    if !tab.rows[i][j].is_zero() {
                        cost[j] -= &tab.rows[i][j];
                    }
                }
                cost_value -= &tab.rhs[i];
            }
        }
        tab.optimize(&mut cost, &mut cost_value);
        if !cost_value.is_zero() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective_value: Rat::zero(),
            });
        }
        // Drive remaining (zero-level) artificials out of the basis.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_art {
                if let Some(c) = (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, c, &mut cost, &mut cost_value);
                } else {
                    // Redundant row.
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for j in first_art..width {
            tab.enterable[j] = false;
        }
    }

    // Phase 2.
    let mut cost = vec![Rat::zero(); width];
    for (j, a) in &obj_coeffs {
        cost[*j] = a.clone();
    }
    let mut cost_value = Rat::zero();
    for i in 0..tab.rows.len() {
        let cb = cost[tab.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            if !tab.rows[i][j].is_zero() {
                cost[j] -= &cb * &tab.rows[i][j];
            }
        }
        cost_value -= &cb * &tab.rhs[i];
    }
    if !tab.optimize(&mut cost, &mut cost_value) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: Rat::zero(),
        });
    }

    let mut col_values = vec![Rat::zero(); width];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_values[b] = tab.rhs[i].clone();
    }
    let values: Vec<Rat> = columns
        .iter()
        .map(|c| match c {
            Column::Shifted { col, offset } => offset + &col_values[*col],
            Column::Mirrored { col, offset } => offset - &col_values[*col],
            Column::Split { plus, minus } => &col_values[*plus] - &col_values[*minus],
        })
        .collect();
    let objective_value = -cost_value + obj_constant;
    debug_assert_eq!(objective_value, lp.objective_value(&values));
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn textbook_min() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.set_objective(x, rat(-1));
        lp.add_constraint("cap", vec![(x, rat(1))], Relation::Le, rat(3));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value(x), &rat(3));
        assert_eq!(sol.objective_value, rat(-3));
        assert!(check_point(&lp, &sol.values).unwrap().is_empty());
    }

    #[test]
    fn contradiction_is_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint("a", vec![(x, rat(1))], Relation::Le, rat(1));
        lp.add_constraint("b", vec![(x, rat(1))], Relation::Ge, rat(2));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn bound_tight_minimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.set_objective(x, rat(1));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.value(x), &rat(0));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.set_objective(x, rat(-1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn undeclared_variable_is_malformed() {
        let mut lp = LinearProgram::new();
        lp.add_var("x");
        lp.add_constraint("bad", vec![(VarId(3), rat(1))], Relation::Le, rat(1));
        assert!(matches!(solve_lp(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn check_point_reports_slack() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint("cap", vec![(x, rat(1))], Relation::Le, rat(3));
        lp.add_constraint("eq", vec![(x, rat(1))], Relation::Eq, rat(5));
        let v = check_point(&lp, &[rat(5)]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].name, "cap");
        assert_eq!(v[0].slack, rat(-2));
        assert!(matches!(check_point(&lp, &[]), Err(Error::MissingValue(_))));
    }

    #[test]
    fn general_bounds_and_free_variables() {
        // min x + y, x free, y in [-2, 5], x - y >= 1, x + y >= -3/2
        let mut lp = LinearProgram::new();
        let x = lp.add_var_bounded("x", None, None);
        let y = lp.add_var_bounded("y", Some(rat(-2)), Some(rat(5)));
        lp.set_objective(x, rat(1));
        lp.set_objective(y, rat(1));
        lp.add_constraint("d", vec![(x, rat(1)), (y, rat(-1))], Relation::Ge, rat(1));
        lp.add_constraint("s", vec![(x, rat(1)), (y, rat(1))], Relation::Ge, ratio(-3, 2));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.objective_value, ratio(-3, 2));
        assert!(check_point(&lp, &sol.values).unwrap().is_empty());
    }

    #[test]
    fn upper_only_variable() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var_bounded("x", None, Some(rat(4)));
        lp.set_objective(x, rat(-2));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.value(x), &rat(4));
        assert_eq!(sol.objective_value, rat(-8));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        let y = lp.add_var("y");
        lp.set_objective(x, rat(1));
        lp.add_constraint("a", vec![(x, rat(1)), (y, rat(1))], Relation::Eq, rat(2));
        lp.add_constraint("b", vec![(x, rat(2)), (y, rat(2))], Relation::Eq, rat(4));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value(x), &rat(0));
        assert_eq!(sol.value(y), &rat(2));
    }

    #[test]
    fn dump_is_readable() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.set_objective(x, rat(1));
        lp.add_constraint("c0", vec![(x, ratio(1, 2))], Relation::Ge, rat(1));
        let text = lp.to_string();
        assert!(text.contains("c0: 1/2 x >= 1"), "{text}");
    }
}
