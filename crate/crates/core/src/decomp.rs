//! Shift/slack structural decomposition of a multiplicative identity.
//!
//! The identity is `c = Π scalar factors × Σ_i w_i · k_i`, where the shares
//! `w_i` form a group that must always sum to one. Share changes are split
//! into exogenous shift variables `F_i` and a single endogenous slack `F`:
//!
//! ```text
//! dc   = Σ_j ∂c/∂x_j dx_j + Σ_i ∂c/∂w_i dw_i
//! dw_i = dF_i + dF
//! Σ dw_i = 0
//! ```
//!
//! Written as `A · dy = B · dz` with `y = [c, w_1..w_m, F]` and `z` the
//! exogenous levels, the change between two observations is integrated with
//! forward Euler steps along straight-line paths, re-assembling `A` and `B`
//! from the current levels at every segment. The first row of the summed
//! per-segment effect matrices gives each driver's contribution to `Δc`.

use crate::error::{Error, Result};
use crate::linalg::{solve_in_place, Matrix};
use crate::model::{Appliance, IntensityBreakdown};

/// Number of Euler segments used unless a caller overrides it.
pub const DEFAULT_SEGMENTS: usize = 16_000;

/// Slack allowed on share bounds and on `Σ w = 1`.
pub const SHARE_EPSILON: f64 = 1e-9;

/// Group label of per-member factors.
pub const MEMBER_FACTOR_GROUP: &str = "k";
/// Group label of share shift variables.
pub const SHIFT_GROUP: &str = "w";

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPath {
    pub name: String,
    pub start: f64,
    pub end: f64,
}

impl FactorPath {
    pub fn new(name: impl Into<String>, start: f64, end: f64) -> Self {
        Self {
            name: name.into(),
            start,
            end,
        }
    }

    pub fn constant(name: impl Into<String>, level: f64) -> Self {
        Self::new(name, level, level)
    }

    pub fn change(&self) -> f64 {
        self.end - self.start
    }

    fn at(&self, t: f64) -> f64 {
        if t >= 1.0 {
            self.end
        } else {
            self.start + (self.end - self.start) * t
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareGroup {
    pub members: Vec<String>,
    pub start_shares: Vec<f64>,
    pub end_shares: Vec<f64>,
    /// Per-member factors `k_i`; all equal to one when absent.
    pub member_factors: Option<Vec<FactorPath>>,
}

impl ShareGroup {
    /// A single member that always holds the whole share.
    pub fn trivial(factor: Option<FactorPath>) -> Self {
        let name = factor
            .as_ref()
            .map_or_else(|| "all".to_string(), |f| f.name.clone());
        Self {
            members: vec![name],
            start_shares: vec![1.0],
            end_shares: vec![1.0],
            member_factors: factor.map(|f| vec![f]),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn factor_levels(&self, t: f64) -> Vec<f64> {
        match &self.member_factors {
            Some(f) => f.iter().map(|x| x.at(t)).collect(),
            None => vec![1.0; self.len()],
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.len();
        if m == 0 {
            return Err(Error::validation(
                "share_group",
                "needs at least one member",
            ));
        }
        if self.start_shares.len() != m || self.end_shares.len() != m {
            return Err(Error::validation(
                "share_group",
                format!("{m} members but share vectors have different lengths"),
            ));
        }
        for (label, shares) in [
            ("start_shares", &self.start_shares),
            ("end_shares", &self.end_shares),
        ] {
            for (name, &w) in self.members.iter().zip(shares) {
                if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                    return Err(Error::validation(
                        format!("{label}.{name}"),
                        format!("share {w} outside [0, 1]"),
                    ));
                }
            }
            let sum: f64 = shares.iter().sum();
            if (sum - 1.0).abs() > SHARE_EPSILON {
                return Err(Error::validation(label, format!("shares sum to {sum}")));
            }
        }
        if let Some(f) = &self.member_factors {
            if f.len() != m {
                return Err(Error::validation(
                    "member_factors",
                    format!("expected {m} factors, got {}", f.len()),
                ));
            }
            f.iter().try_for_each(validate_path)?;
        }
        Ok(())
    }
}

fn validate_path(f: &FactorPath) -> Result<()> {
    for (which, v) in [("start", f.start), ("end", f.end)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::validation(
                format!("{}.{which}", f.name),
                format!("level must be finite and >= 0, got {v}"),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionProblem {
    pub scalar_factors: Vec<FactorPath>,
    pub share_group: ShareGroup,
    pub segments: usize,
    /// `c(0) = 0` while `c(T) ≠ 0`: contributions are defined but rates are not
    /// meaningful.
    pub degenerate_start: bool,
}

impl DecompositionProblem {
    pub fn new(scalar_factors: Vec<FactorPath>, share_group: ShareGroup, segments: usize) -> Self {
        let mut problem = Self {
            scalar_factors,
            share_group,
            segments,
            degenerate_start: false,
        };
        problem.degenerate_start = {
            let (c0, ct) = (problem.value_at_start(), problem.value_at_end());
            c0 == 0.0 && ct != 0.0
        };
        problem
    }

    pub fn with_segments(mut self, segments: usize) -> Self {
        self.segments = segments;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::validation("segments", "must be >= 1"));
        }
        self.scalar_factors.iter().try_for_each(validate_path)?;
        self.share_group.validate()?;
        let c0 = self.value_at_start();
        if !c0.is_finite() {
            return Err(Error::validation("c(0)", format!("not finite: {c0}")));
        }
        Ok(())
    }

    fn value_with(
        &self,
        scalars: impl Iterator<Item = f64>,
        shares: &[f64],
        factors: &[f64],
    ) -> f64 {
        let prod: f64 = scalars.product();
        prod * shares.iter().zip(factors).map(|(w, k)| w * k).sum::<f64>()
    }

    pub fn value_at_start(&self) -> f64 {
        self.value_with(
            self.scalar_factors.iter().map(|f| f.start),
            &self.share_group.start_shares,
            &self.share_group.factor_levels(0.0),
        )
    }

    pub fn value_at_end(&self) -> f64 {
        self.value_with(
            self.scalar_factors.iter().map(|f| f.end),
            &self.share_group.end_shares,
            &self.share_group.factor_levels(1.0),
        )
    }

    /// Driver names in exogenous-vector order: scalar factors, member factors
    /// (when present), then one shift variable per member.
    pub fn driver_names(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .scalar_factors
            .iter()
            .map(|f| (f.name.clone(), f.name.clone()))
            .collect();
        if let Some(factors) = &self.share_group.member_factors {
            out.extend(
                factors
                    .iter()
                    .map(|f| (f.name.clone(), MEMBER_FACTOR_GROUP.to_string())),
            );
        }
        out.extend(
            self.share_group
                .members
                .iter()
                .map(|m| (format!("F_{m}"), SHIFT_GROUP.to_string())),
        );
        out
    }

    /// Total change of each exogenous variable, in driver order. Shift
    /// variables move by the observed share change.
    fn exogenous_changes(&self) -> Vec<f64> {
        let g = &self.share_group;
        let mut dz: Vec<f64> = self.scalar_factors.iter().map(FactorPath::change).collect();
        if let Some(factors) = &g.member_factors {
            dz.extend(factors.iter().map(FactorPath::change));
        }
        dz.extend(g.end_shares.iter().zip(&g.start_shares).map(|(b, a)| b - a));
        dz
    }

    fn update_levels(&self, t: f64, shares: &[f64], levels: &mut Levels) {
        for (x, f) in levels.scalars.iter_mut().zip(&self.scalar_factors) {
            *x = f.at(t);
        }
        if let Some(factors) = &self.share_group.member_factors {
            for (x, f) in levels.member_factors.iter_mut().zip(factors) {
                *x = f.at(t);
            }
        }
        levels.shares.copy_from_slice(shares);
    }

    fn levels_at(&self, t: f64, shares: &[f64]) -> Levels {
        Levels {
            scalars: self.scalar_factors.iter().map(|f| f.at(t)).collect(),
            member_factors: self.share_group.factor_levels(t),
            shares: shares.to_vec(),
        }
    }
}

/// Current values of every level variable, used to evaluate the partials.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub scalars: Vec<f64>,
    pub member_factors: Vec<f64>,
    pub shares: Vec<f64>,
}

/// Builds `A` (order m+2) and `B` (m+2 by number of drivers) at `levels`.
pub fn assemble_system(
    problem: &DecompositionProblem,
    levels: &Levels,
) -> Result<(Matrix, Matrix)> {
    let mut a = Matrix::zeros(0, 0);
    let mut b = Matrix::zeros(0, 0);
    assemble_into(problem, levels, &mut a, &mut b)?;
    Ok((a, b))
}

fn assemble_into(
    problem: &DecompositionProblem,
    levels: &Levels,
    a: &mut Matrix,
    b: &mut Matrix,
) -> Result<()> {
    let s = levels.scalars.len();
    let m = levels.shares.len();
    let has_k = problem.share_group.member_factors.is_some();
    let n_drivers = s + if has_k { m } else { 0 } + m;
    let order = m + 2;
    if a.rows() != order || a.cols() != order {
        *a = Matrix::zeros(order, order);
    } else {
        a.fill(0.0);
    }
    if b.rows() != order || b.cols() != n_drivers {
        *b = Matrix::zeros(order, n_drivers);
    } else {
        b.fill(0.0);
    }

    // Π_{l≠j} x_l as prefix × suffix products, so zero levels are handled.
    let prod: f64 = levels.scalars.iter().product();
    let weighted: f64 = levels
        .shares
        .iter()
        .zip(&levels.member_factors)
        .map(|(w, k)| w * k)
        .sum();

    let check = |value: f64, idx: usize| -> Result<f64> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinitePartial {
                factor: problem.driver_names().swap_remove(idx).0,
            })
        }
    };

    let mut prefix = 1.0;
    for j in 0..s {
        let suffix: f64 = levels.scalars[j + 1..].iter().product();
        b[(0, j)] = check(prefix * suffix * weighted, j)?;
        prefix *= levels.scalars[j];
    }
    let mut col = s;
    if has_k {
        for i in 0..m {
            b[(0, col)] = check(prod * levels.shares[i], col)?;
            col += 1;
        }
    }
    for i in 0..m {
        b[(1 + i, col + i)] = 1.0;
    }

    a[(0, 0)] = 1.0;
    for i in 0..m {
        let dc_dw = prod * levels.member_factors[i];
        if !dc_dw.is_finite() {
            return Err(Error::NonFinitePartial {
                factor: problem.share_group.members[i].clone(),
            });
        }
        a[(0, 1 + i)] = -dc_dw;
        a[(1 + i, 1 + i)] = 1.0;
        a[(1 + i, m + 1)] = -1.0;
        a[(m + 1, 1 + i)] = 1.0;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub driver: String,
    pub group: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributionLedger {
    pub per_driver: Vec<Contribution>,
    /// Contributions summed per group, in first-appearance order.
    pub grouped: Vec<(String, f64)>,
    pub c_start: f64,
    pub c_end: f64,
    /// `c_end − c_start`, from the identity evaluated at the endpoints.
    pub total_change: f64,
    /// `total_change − Σ per_driver`.
    pub residual: f64,
    /// Bound on `|residual|` expected from the first-order integration error.
    pub residual_tolerance: f64,
    pub segments: usize,
    /// Largest `|Σ w − 1|` seen after any segment.
    pub max_share_sum_error: f64,
    pub degenerate_start: bool,
    /// Summed effect matrix: rows are `[c, w_1..w_m, F]`, columns are drivers.
    pub effects: Matrix,
}

impl ContributionLedger {
    pub fn group(&self, name: &str) -> Option<f64> {
        self.grouped
            .iter()
            .find(|(g, _)| g == name)
            .map(|(_, v)| *v)
    }

    pub fn driver(&self, name: &str) -> Option<f64> {
        self.per_driver
            .iter()
            .find(|c| c.driver == name)
            .map(|c| c.value)
    }

    /// Contribution divided by the net change; `None` when nothing changed.
    pub fn rate(&self, group: &str) -> Option<f64> {
        let v = self.group(group)?;
        (self.total_change != 0.0).then(|| v / self.total_change)
    }

    pub fn residual_rate(&self) -> Option<f64> {
        (self.total_change != 0.0).then(|| self.residual / self.total_change)
    }

    pub fn explained_change(&self) -> f64 {
        self.per_driver.iter().map(|c| c.value).sum()
    }
}

/// Integrates the problem with `problem.segments` forward Euler segments.
pub fn decompose(problem: &DecompositionProblem) -> Result<ContributionLedger> {
    integrate(problem, problem.segments)
}

/// Runs the same integration at a much finer resolution, for verification.
pub fn oracle_integrate(
    problem: &DecompositionProblem,
    fine_segments: usize,
) -> Result<ContributionLedger> {
    let min = problem.segments.saturating_mul(16);
    if fine_segments < min {
        return Err(Error::validation(
            "fine_segments",
            format!(
                "{fine_segments} is below 16 × {} segments",
                problem.segments
            ),
        ));
    }
    integrate(problem, fine_segments)
}

fn integrate(problem: &DecompositionProblem, segments: usize) -> Result<ContributionLedger> {
    problem.validate()?;
    if segments == 0 {
        return Err(Error::validation("segments", "must be >= 1"));
    }
    let names = problem.driver_names();
    let m = problem.share_group.len();
    let n_drivers = names.len();
    let order = m + 2;
    let step = 1.0 / segments as f64;
    let dz: Vec<f64> = problem
        .exogenous_changes()
        .into_iter()
        .map(|d| d * step)
        .collect();

    let c_start = problem.value_at_start();
    let mut shares = problem.share_group.start_shares.clone();
    let mut effects = Matrix::zeros(order, n_drivers);
    let mut max_share_sum_error: f64 = (shares.iter().sum::<f64>() - 1.0).abs();
    let (mut a, mut b) = (Matrix::zeros(order, order), Matrix::zeros(order, n_drivers));

    let mut levels = problem.levels_at(0.0, &shares);
    for segment in 0..segments {
        let t = segment as f64 * step;
        problem.update_levels(t, &shares, &mut levels);
        assemble_into(problem, &levels, &mut a, &mut b)?;
        // B · diag(dz)
        for r in 0..order {
            for (v, d) in b.row_mut(r).iter_mut().zip(&dz) {
                *v *= d;
            }
        }
        solve_in_place(&mut a, &mut b).map_err(|_| Error::SingularMatrix {
            segment: segment + 1,
        })?;

        for r in 0..order {
            let row = b.row(r);
            for (acc, v) in effects.row_mut(r).iter_mut().zip(row) {
                *acc += v;
            }
            if (1..=m).contains(&r) {
                shares[r - 1] += row.iter().sum::<f64>();
            }
        }

        let sum: f64 = shares.iter().sum();
        let drift = (sum - 1.0).abs();
        max_share_sum_error = max_share_sum_error.max(drift);
        if drift > SHARE_EPSILON {
            return Err(Error::ShareSumDrift {
                segment: segment + 1,
                sum,
            });
        }
        if let Some((i, &w)) = shares
            .iter()
            .enumerate()
            .find(|(_, w)| !(-SHARE_EPSILON..=1.0 + SHARE_EPSILON).contains(*w))
        {
            return Err(Error::ShareOutOfRange {
                segment: segment + 1,
                member: problem.share_group.members[i].clone(),
                value: w,
            });
        }
    }

    let per_driver: Vec<Contribution> = names
        .iter()
        .zip(effects.row(0))
        .map(|((driver, group), &value)| Contribution {
            driver: driver.clone(),
            group: group.clone(),
            value,
        })
        .collect();
    let mut grouped: Vec<(String, f64)> = Vec::new();
    for c in &per_driver {
        match grouped.iter_mut().find(|(g, _)| *g == c.group) {
            Some((_, v)) => *v += c.value,
            None => grouped.push((c.group.clone(), c.value)),
        }
    }

    let c_end = problem.value_at_end();
    let total_change = c_end - c_start;
    let explained: f64 = per_driver.iter().map(|c| c.value).sum();
    Ok(ContributionLedger {
        per_driver,
        grouped,
        c_start,
        c_end,
        total_change,
        residual: total_change - explained,
        residual_tolerance: residual_bound(problem, segments)?,
        segments,
        max_share_sum_error,
        degenerate_start: problem.degenerate_start,
        effects,
    })
}

/// Rate of change of `c` along the straight-line path at `t`.
fn path_derivative(problem: &DecompositionProblem, t: f64) -> Result<f64> {
    let g = &problem.share_group;
    let shares: Vec<f64> = g
        .start_shares
        .iter()
        .zip(&g.end_shares)
        .map(|(a, b)| a + (b - a) * t)
        .collect();
    let (mut a, b) = assemble_system(problem, &problem.levels_at(t, &shares))?;
    let dz = problem.exogenous_changes();
    let mut rhs = Matrix::zeros(b.rows(), 1);
    for r in 0..b.rows() {
        rhs[(r, 0)] = b.row(r).iter().zip(&dz).map(|(x, d)| x * d).sum();
    }
    solve_in_place(&mut a, &mut rhs).map_err(|_| Error::SingularMatrix { segment: 0 })?;
    Ok(rhs[(0, 0)])
}

/// Left-endpoint sums miss `∫g` by about `(g(1) − g(0)) / 2N`; the published
/// bound is four times the largest sampled `|g|` over `N`, plus rounding.
fn residual_bound(problem: &DecompositionProblem, segments: usize) -> Result<f64> {
    let mut peak: f64 = 0.0;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        peak = peak.max(path_derivative(problem, t)?.abs());
    }
    let scale = problem.value_at_start().abs() + problem.value_at_end().abs();
    Ok(4.0 * peak / segments as f64 + 1e-12 * scale)
}

/// Which drivers a breakdown-based problem includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorSet {
    /// Persons per household.
    pub p: bool,
    /// Placeholder factor held at 1.
    pub g: bool,
    /// Income per person.
    pub n: bool,
    /// Energy per unit income.
    pub e: bool,
    /// Emission factors.
    pub k: bool,
    /// Appliance energy structure.
    pub w: bool,
}

impl Default for FactorSet {
    fn default() -> Self {
        Self {
            p: true,
            g: false,
            n: true,
            e: true,
            k: true,
            w: true,
        }
    }
}

impl FactorSet {
    /// Parses a comma-separated list such as `p,n,e,k,w`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = Self {
            p: false,
            g: false,
            n: false,
            e: false,
            k: false,
            w: false,
        };
        let mut any = false;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            any = true;
            let slot = match item {
                "p" => &mut set.p,
                "g" => &mut set.g,
                "n" => &mut set.n,
                "e" => &mut set.e,
                "k" => &mut set.k,
                "w" => &mut set.w,
                other => return Err(Error::FactorSet(format!("unknown factor `{other}`"))),
            };
            *slot = true;
        }
        if !any {
            return Err(Error::FactorSet("factor set is empty".into()));
        }
        let missing: Vec<&str> = [("p", set.p), ("n", set.n), ("e", set.e), ("k", set.k)]
            .iter()
            .filter(|(_, on)| !on)
            .map(|(name, _)| *name)
            .collect();
        if !missing.is_empty() {
            return Err(Error::FactorSet(format!(
                "the identity c = p·n·e·k needs {}; only g and w are optional",
                missing.join(", ")
            )));
        }
        Ok(set)
    }

    /// Group labels reported by a ledger built with this set.
    pub fn groups(&self) -> Vec<&'static str> {
        let mut out = vec!["p"];
        if self.g {
            out.push("g");
        }
        out.extend(["n", "e", "k"]);
        if self.w {
            out.push("w");
        }
        out
    }
}

impl std::fmt::Display for FactorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.groups().join(","))
    }
}

/// Sets up `c = p·[g]·n·e·Σ w_i k_i` between two cells of the same series.
///
/// Without `w` the share group collapses to one member carrying the cell's
/// effective emission factor, which is the plain `c = p·n·e·k` identity.
pub fn build_problem_from_breakdowns(
    start: &IntensityBreakdown,
    end: &IntensityBreakdown,
    factors: FactorSet,
    segments: usize,
) -> Result<DecompositionProblem> {
    if start.state != end.state || start.locale != end.locale {
        return Err(Error::validation(
            "series",
            format!(
                "start {}/{} and end {}/{} belong to different series",
                start.state, start.locale, end.state, end.locale
            ),
        ));
    }
    let mut scalars = vec![FactorPath::new("p", start.p, end.p)];
    if factors.g {
        scalars.push(FactorPath::constant("g", 1.0));
    }
    scalars.push(FactorPath::new("n", start.n, end.n));
    scalars.push(FactorPath::new("e", start.e, end.e));

    let group = if factors.w {
        ShareGroup {
            members: Appliance::ALL
                .iter()
                .map(|a| a.as_str().to_string())
                .collect(),
            start_shares: start.energy_shares.to_vec(),
            end_shares: end.energy_shares.to_vec(),
            member_factors: Some(
                Appliance::ALL
                    .iter()
                    .map(|&a| {
                        FactorPath::new(
                            format!("k_{a}"),
                            start.appliance_emission_factor(a),
                            end.appliance_emission_factor(a),
                        )
                    })
                    .collect(),
            ),
        }
    } else {
        ShareGroup::trivial(Some(FactorPath::new(
            "k",
            start.emission_factor,
            end.emission_factor,
        )))
    };
    let problem = DecompositionProblem::new(scalars, group, segments);
    problem.validate()?;
    Ok(problem)
}
