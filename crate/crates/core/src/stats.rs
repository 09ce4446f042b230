//! Run aggregation, Friedman mean ranks and Holm post-hoc p-values.
//!
//! The comparison protocol: per instance, algorithms are ranked by
//! descending mean fitness (rank 1 = best, ties averaged); mean ranks feed a
//! z-statistic per non-control algorithm,
//! `z = (R_j - R_control) / sqrt(k (k + 1) / (6 n))`, with two-sided normal
//! p-values and Holm's step-down adjustment.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Standard normal CDF and the complementary error function it rests on.
///
/// `erfc` uses two classical expansions, both accurate to near machine
/// precision (far beyond the 1e-8 the p-value checks require): a
/// positive-term Taylor series for small arguments and the Legendre
/// continued fraction of the upper incomplete gamma function, evaluated with
/// the modified Lentz scheme, for large ones.
mod normal {
    const SQRT_PI: f64 = 1.772_453_850_905_516;

    /// erf via `erf(x) = (2 x e^{-x^2} / sqrt(pi)) * sum_n (2 x^2)^n / (2n+1)!!`,
    /// all terms positive, so there is no cancellation.
    fn erf_series(x: f64) -> f64 {
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        while term > f64::EPSILON * sum {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 * x * (-x2).exp() / SQRT_PI * sum
    }

    /// erfc via `Q(1/2, x^2)` where `Q` is the regularized upper incomplete
    /// gamma function, evaluated by its continued fraction (modified Lentz).
    fn erfc_continued_fraction(x: f64) -> f64 {
        let a = 0.5;
        let x2 = x * x;
        let tiny = 1e-300;
        let mut b = x2 + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..400 {
            let numerator = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = numerator * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + numerator / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                break;
            }
        }
        (-x2).exp() * x / SQRT_PI * h
    }

    pub fn erfc(x: f64) -> f64 {
        if x < 0.0 {
            2.0 - erfc(-x)
        } else if x < 1.5 {
            1.0 - erf_series(x)
        } else {
            erfc_continued_fraction(x)
        }
    }

    /// Standard normal CDF.
    pub fn phi(z: f64) -> f64 {
        0.5 * erfc(-z / std::f64::consts::SQRT_2)
    }

    /// Two-sided tail probability `2 (1 - phi(|z|))`, computed directly as
    /// `erfc(|z| / sqrt(2))` to avoid cancellation.
    pub fn two_sided_p(z: f64) -> f64 {
        erfc(z.abs() / std::f64::consts::SQRT_2)
    }
}

pub use normal::phi as standard_normal_cdf;

/// Mean, best (maximum) and population standard deviation of one result
/// cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellAggregate {
    pub mean: f64,
    pub best: f64,
    pub std_dev: f64,
}

/// Aggregates the runs of one (algorithm, instance) cell. Modularity is
/// maximized, so `best` is the maximum; the standard deviation uses the
/// population form (divisor n).
pub fn aggregate(runs: &[f64]) -> Result<CellAggregate> {
    if runs.is_empty() {
        return Err(Error::EmptyRuns);
    }
    let n = runs.len() as f64;
    let mean = runs.iter().sum::<f64>() / n;
    let best = runs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let variance = runs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(CellAggregate {
        mean,
        best,
        std_dev: variance.sqrt(),
    })
}

/// Per-(algorithm, instance) run fitness values, in first-seen order for
/// both axes.
#[derive(Debug, Clone, Default)]
pub struct ResultMatrix {
    algorithms: Vec<String>,
    instances: Vec<String>,
    cells: Vec<Vec<Vec<f64>>>,
}

impl ResultMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn instances(&self) -> &[String] {
        &self.instances
    }

    fn algorithm_index(&mut self, name: &str) -> usize {
        if let Some(i) = self.algorithms.iter().position(|a| a == name) {
            return i;
        }
        self.algorithms.push(name.to_string());
        self.cells
            .push(vec![Vec::new(); self.instances.len()]);
        self.algorithms.len() - 1
    }

    fn instance_index(&mut self, name: &str) -> usize {
        if let Some(i) = self.instances.iter().position(|x| x == name) {
            return i;
        }
        self.instances.push(name.to_string());
        for row in &mut self.cells {
            row.push(Vec::new());
        }
        self.instances.len() - 1
    }

    /// Appends one run's fitness, registering unseen algorithms/instances.
    pub fn push(&mut self, algorithm: &str, instance: &str, fitness: f64) {
        let a = self.algorithm_index(algorithm);
        let i = self.instance_index(instance);
        self.cells[a][i].push(fitness);
    }

    pub fn cell(&self, algorithm: &str, instance: &str) -> Option<&[f64]> {
        let a = self.algorithms.iter().position(|x| x == algorithm)?;
        let i = self.instances.iter().position(|x| x == instance)?;
        Some(&self.cells[a][i])
    }

    /// Per-cell mean fitness as an `[algorithm][instance]` matrix; every
    /// cell must be nonempty.
    pub fn means(&self) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.algorithms.len());
        for (a, row) in self.cells.iter().enumerate() {
            let mut means = Vec::with_capacity(self.instances.len());
            for (i, cell) in row.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::MissingCell {
                        algorithm: self.algorithms[a].clone(),
                        instance: self.instances[i].clone(),
                    });
                }
                means.push(aggregate(cell)?.mean);
            }
            out.push(means);
        }
        Ok(out)
    }

    /// All cells must hold the same number of runs for the comparison to be
    /// balanced.
    pub fn validate_equal_runs(&self) -> Result<()> {
        let expected = self
            .cells
            .first()
            .and_then(|row| row.first())
            .map(Vec::len)
            .unwrap_or(0);
        for (a, row) in self.cells.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                if cell.len() != expected {
                    return Err(Error::UnevenRuns {
                        algorithm: self.algorithms[a].clone(),
                        instance: self.instances[i].clone(),
                        expected,
                        actual: cell.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reads a results CSV with columns `algorithm`, `instance` and
    /// `fitness` (or `best_fitness`, as written by the experiment harness).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(false)
            .from_path(path)
            .map_err(|e| Error::MalformedCsvRow {
                line: 0,
                message: e.to_string(),
            })?;
        let headers = reader.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let algorithm_col = find("algorithm").ok_or_else(|| Error::MalformedCsvRow {
            line: 1,
            message: "missing required column `algorithm`".into(),
        })?;
        let instance_col = find("instance").ok_or_else(|| Error::MalformedCsvRow {
            line: 1,
            message: "missing required column `instance`".into(),
        })?;
        let fitness_col = find("fitness")
            .or_else(|| find("best_fitness"))
            .ok_or_else(|| Error::MalformedCsvRow {
                line: 1,
                message: "missing required column `fitness` or `best_fitness`".into(),
            })?;
        let mut matrix = ResultMatrix::new();
        for record in reader.records() {
            let record = record?;
            let line = record
                .position()
                .map(|p| p.line())
                .unwrap_or_default();
            let fitness_text =
                record
                    .get(fitness_col)
                    .ok_or_else(|| Error::MalformedCsvRow {
                        line,
                        message: "row is missing the fitness field".into(),
                    })?;
            let fitness: f64 = fitness_text.parse().map_err(|_| Error::MalformedCsvRow {
                line,
                message: format!("cannot parse fitness value {fitness_text:?}"),
            })?;
            matrix.push(
                record.get(algorithm_col).unwrap_or_default(),
                record.get(instance_col).unwrap_or_default(),
                fitness,
            );
        }
        Ok(matrix)
    }
}

/// Per-instance descending-fitness ranks averaged over instances. Ties get
/// the mean of their positions, so each instance's ranks always sum to
/// `k (k + 1) / 2`.
#[allow(clippy::needless_range_loop)]
pub fn friedman_ranks(means: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = means.len();
    if k == 0 {
        return Err(Error::InvalidConfig("no algorithms to rank".into()));
    }
    let n = means[0].len();
    if n == 0 {
        return Err(Error::InvalidConfig("no instances to rank over".into()));
    }
    if means.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidConfig(
            "ragged means matrix: every algorithm needs a value per instance".into(),
        ));
    }
    let mut rank_sums = vec![0.0; k];
    for instance in 0..n {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            means[b][instance]
                .partial_cmp(&means[a][instance])
                .expect("fitness means are finite")
        });
        let mut position = 0;
        while position < k {
            let mut end = position;
            while end + 1 < k
                && means[order[end + 1]][instance] == means[order[position]][instance]
            {
                end += 1;
            }
            // Positions are 0-based; ranks are 1-based.
            let shared_rank = (position + end) as f64 / 2.0 + 1.0;
            for &algorithm in &order[position..=end] {
                rank_sums[algorithm] += shared_rank;
            }
            position = end + 1;
        }
    }
    Ok(rank_sums.into_iter().map(|s| s / n as f64).collect())
}

/// One non-control comparison from Holm's post-hoc procedure.
#[derive(Debug, Clone, Serialize)]
pub struct HolmComparison {
    pub algorithm: String,
    pub z: f64,
    pub unadjusted_p: f64,
    pub adjusted_p: f64,
}

/// Holm's step-down post-hoc test of every algorithm against the control,
/// based on Friedman mean ranks over `n_instances` instances.
pub fn holm_posthoc(
    mean_ranks: &[f64],
    algorithms: &[String],
    n_instances: usize,
    control: &str,
) -> Result<Vec<HolmComparison>> {
    let k = mean_ranks.len();
    assert_eq!(algorithms.len(), k, "one name per rank");
    if k < 2 {
        return Err(Error::InvalidConfig(
            "post-hoc comparison needs at least two algorithms".into(),
        ));
    }
    if n_instances == 0 {
        return Err(Error::InvalidConfig(
            "post-hoc comparison needs at least one instance".into(),
        ));
    }
    let control_index = algorithms
        .iter()
        .position(|a| a == control)
        .ok_or_else(|| Error::UnknownAlgorithm(control.to_string()))?;
    let standard_error = (k as f64 * (k as f64 + 1.0) / (6.0 * n_instances as f64)).sqrt();

    let mut comparisons: Vec<HolmComparison> = algorithms
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != control_index)
        .map(|(j, name)| {
            let z = (mean_ranks[j] - mean_ranks[control_index]) / standard_error;
            HolmComparison {
                algorithm: name.clone(),
                z,
                unadjusted_p: normal::two_sided_p(z),
                adjusted_p: f64::NAN,
            }
        })
        .collect();

    // Step-down adjustment: sort p ascending, multiply by (m - l), and keep
    // the running maximum so adjusted values are monotone.
    let m = comparisons.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        comparisons[a]
            .unadjusted_p
            .partial_cmp(&comparisons[b].unadjusted_p)
            .expect("p-values are finite")
    });
    let mut running_max = 0.0_f64;
    for (l, &j) in order.iter().enumerate() {
        let scaled = ((m - l) as f64 * comparisons[j].unadjusted_p).min(1.0);
        running_max = running_max.max(scaled);
        comparisons[j].adjusted_p = running_max;
    }
    Ok(comparisons)
}

/// Full statistical report: per-cell aggregates, Friedman mean ranks, and
/// the Holm comparisons against the control algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub control: String,
    pub run_count: usize,
    pub algorithms: Vec<String>,
    pub instances: Vec<String>,
    /// `[algorithm][instance]`, aligned with the name vectors.
    pub aggregates: Vec<Vec<CellAggregate>>,
    pub mean_ranks: Vec<f64>,
    /// Empty when fewer than two algorithms are present.
    pub comparisons: Vec<HolmComparison>,
}

/// Builds the report for a result matrix, ranking on per-cell mean fitness.
pub fn build_report(matrix: &ResultMatrix, control: &str) -> Result<StatsReport> {
    matrix.validate_equal_runs()?;
    let means = matrix.means()?;
    let algorithms = matrix.algorithms().to_vec();
    let instances = matrix.instances().to_vec();
    let run_count = matrix
        .cell(&algorithms[0], &instances[0])
        .map(<[f64]>::len)
        .unwrap_or(0);
    let mut aggregates = Vec::with_capacity(algorithms.len());
    for algorithm in &algorithms {
        let mut row = Vec::with_capacity(instances.len());
        for instance in &instances {
            row.push(aggregate(matrix.cell(algorithm, instance).unwrap())?);
        }
        aggregates.push(row);
    }
    let mean_ranks = friedman_ranks(&means)?;
    let comparisons = if algorithms.len() >= 2 {
        holm_posthoc(&mean_ranks, &algorithms, instances.len(), control)?
    } else {
        Vec::new()
    };
    Ok(StatsReport {
        control: control.to_string(),
        run_count,
        algorithms,
        instances,
        aggregates,
        mean_ranks,
        comparisons,
    })
}

impl StatsReport {
    /// Plain-text rendering: a fitness table (mean / best / std per cell)
    /// followed by the rank and post-hoc tables.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Fitness per instance over {} run(s): mean / best / std\n",
            self.run_count
        ));
        out.push_str(&format!("{:<16}", "instance"));
        for algorithm in &self.algorithms {
            out.push_str(&format!("{:<26}", algorithm));
        }
        out.push('\n');
        for (i, instance) in self.instances.iter().enumerate() {
            out.push_str(&format!("{instance:<16}"));
            for row in &self.aggregates {
                let cell = &row[i];
                out.push_str(&format!(
                    "{:<26}",
                    format!("{:.4} / {:.4} / {:.4}", cell.mean, cell.best, cell.std_dev)
                ));
            }
            out.push('\n');
        }
        out.push('\n');
        out.push_str("Friedman mean ranks (lower is better)\n");
        for (algorithm, rank) in self.algorithms.iter().zip(&self.mean_ranks) {
            out.push_str(&format!("{algorithm:<10} {rank:.4}\n"));
        }
        if !self.comparisons.is_empty() {
            out.push('\n');
            out.push_str(&format!(
                "Holm post-hoc vs control {} (two-sided)\n",
                self.control
            ));
            out.push_str(&format!(
                "{:<10} {:>10} {:>14} {:>12}\n",
                "algorithm", "z", "unadjusted_p", "adjusted_p"
            ));
            for c in &self.comparisons {
                out.push_str(&format!(
                    "{:<10} {:>10.4} {:>14.6} {:>12.6}\n",
                    c.algorithm, c.z, c.unadjusted_p, c.adjusted_p
                ));
            }
        }
        out
    }

    /// Writes `aggregates.csv` and `friedman_holm.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let aggregates_path = dir.join("aggregates.csv");
        let mut out = Vec::new();
        writeln!(out, "instance,algorithm,mean,best,std").expect("vec write");
        for (i, instance) in self.instances.iter().enumerate() {
            for (a, algorithm) in self.algorithms.iter().enumerate() {
                let cell = &self.aggregates[a][i];
                writeln!(
                    out,
                    "{instance},{algorithm},{},{},{}",
                    cell.mean, cell.best, cell.std_dev
                )
                .expect("vec write");
            }
        }
        std::fs::write(&aggregates_path, out).map_err(|e| Error::io(&aggregates_path, e))?;

        let stats_path = dir.join("friedman_holm.csv");
        let mut out = Vec::new();
        writeln!(out, "algorithm,mean_rank,z,unadjusted_p,adjusted_p").expect("vec write");
        for (a, algorithm) in self.algorithms.iter().enumerate() {
            match self.comparisons.iter().find(|c| &c.algorithm == algorithm) {
                Some(c) => writeln!(
                    out,
                    "{algorithm},{},{},{},{}",
                    self.mean_ranks[a], c.z, c.unadjusted_p, c.adjusted_p
                )
                .expect("vec write"),
                None => writeln!(out, "{algorithm},{},,,", self.mean_ranks[a]).expect("vec write"),
            }
        }
        std::fs::write(&stats_path, out).map_err(|e| Error::io(&stats_path, e))?;
        Ok((aggregates_path, stats_path))
    }
}

/// Published mean fitness values of the benchmark comparison, kept here so
/// both the unit tests and the acceptance suite reproduce the reference
/// ranks and p-values from the same source.
pub mod reference {
    pub const ALGORITHMS: [&str; 3] = ["covns", "pvns", "svns"];

    pub const OI_MEANS: [[f64; 11]; 3] = [
        [
            0.330, 0.322, 0.342, 0.311, 0.291, 0.301, 0.276, 0.256, 0.247, 0.252, 0.230,
        ],
        [
            0.322, 0.294, 0.280, 0.252, 0.224, 0.224, 0.200, 0.179, 0.172, 0.165, 0.157,
        ],
        [
            0.319, 0.286, 0.290, 0.260, 0.229, 0.226, 0.205, 0.189, 0.169, 0.172, 0.160,
        ],
    ];

    pub const UI_MEANS: [[f64; 11]; 3] = [
        [
            0.299, 0.279, 0.287, 0.251, 0.227, 0.231, 0.205, 0.180, 0.169, 0.168, 0.164,
        ],
        [
            0.323, 0.282, 0.270, 0.243, 0.226, 0.222, 0.201, 0.183, 0.167, 0.169, 0.163,
        ],
        [
            0.322, 0.295, 0.280, 0.258, 0.219, 0.217, 0.201, 0.203, 0.166, 0.162, 0.152,
        ],
    ];
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn aggregate_single_run() {
        let a = aggregate(&[0.3]).unwrap();
        assert_eq!((a.mean, a.best, a.std_dev), (0.3, 0.3, 0.0));
    }

    #[test]
    fn aggregate_two_runs_population_std() {
        let a = aggregate(&[0.2, 0.4]).unwrap();
        assert!((a.mean - 0.3).abs() < 1e-15);
        assert_eq!(a.best, 0.4);
        assert!((a.std_dev - 0.1).abs() < 1e-15);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyRuns)));
    }

    #[test]
    fn aggregate_matches_streaming_oracle() {
        // Welford's online algorithm as an independent route.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let runs: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
            let two_pass = aggregate(&runs).unwrap();
            let mut mean = 0.0;
            let mut m2 = 0.0;
            let mut best = f64::NEG_INFINITY;
            for (i, &x) in runs.iter().enumerate() {
                let delta = x - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (x - mean);
                best = best.max(x);
            }
            let std_dev = (m2 / runs.len() as f64).sqrt();
            assert!((two_pass.mean - mean).abs() < 1e-12);
            assert!((two_pass.std_dev - std_dev).abs() < 1e-12);
            assert_eq!(two_pass.best, best);
        }
    }

    #[test]
    fn normal_cdf_matches_high_precision_references() {
        // Reference values computed with 30-digit arithmetic.
        let cases = [
            (0.0, 0.5),
            (0.5, 0.6914624612740131),
            (1.0, 0.8413447460685429),
            (-1.0, 0.15865525393145705),
            (1.959963984540054, 0.975),
            (2.0, 0.9772498680518208),
            (-2.5, 0.006209665325776136),
            (3.0, 0.9986501019683699),
            (4.051, 0.9999745003962461),
            (-4.0, 3.167124183311992e-5),
            (5.0, 0.9999997133484281),
            (8.0, 0.9999999999999994),
        ];
        for (z, expected) in cases {
            let got = standard_normal_cdf(z);
            assert!(
                (got - expected).abs() < 1e-14,
                "phi({z}) = {got}, want {expected}"
            );
        }
        // Deep tail, checked relatively.
        let tail = standard_normal_cdf(-8.0);
        assert!((tail - 6.220960574271784e-16).abs() < 1e-24);
    }

    #[test]
    fn friedman_reproduces_reference_oi_ranks() {
        let means: Vec<Vec<f64>> = reference::OI_MEANS.iter().map(|r| r.to_vec()).collect();
        let ranks = friedman_ranks(&means).unwrap();
        assert!((ranks[0] - 1.0).abs() < 1e-12);
        assert!((ranks[1] - 2.7273).abs() < 1e-4);
        assert!((ranks[2] - 2.2727).abs() < 1e-4);
    }

    #[test]
    fn friedman_reproduces_reference_ui_ranks() {
        let means: Vec<Vec<f64>> = reference::UI_MEANS.iter().map(|r| r.to_vec()).collect();
        let ranks = friedman_ranks(&means).unwrap();
        assert!((ranks[0] - 1.7273).abs() < 1e-4);
        assert!((ranks[1] - 2.0455).abs() < 1e-4);
        assert!((ranks[2] - 2.2273).abs() < 1e-4);
    }

    #[test]
    fn friedman_full_tie_averages_ranks() {
        let means = vec![vec![0.5, 0.7], vec![0.5, 0.7]];
        let ranks = friedman_ranks(&means).unwrap();
        assert_eq!(ranks, vec![1.5, 1.5]);
    }

    #[test]
    fn friedman_per_instance_ranks_sum_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let k = rng.gen_range(2..6);
            let n = rng.gen_range(1..8);
            let means: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let ranks = friedman_ranks(&means).unwrap();
            let total: f64 = ranks.iter().sum::<f64>() * n as f64;
            let expected = n as f64 * (k * (k + 1)) as f64 / 2.0;
            assert!((total - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn friedman_rank_is_invariant_under_monotone_transform() {
        let means: Vec<Vec<f64>> = reference::OI_MEANS.iter().map(|r| r.to_vec()).collect();
        let transformed: Vec<Vec<f64>> = means
            .iter()
            .map(|row| row.iter().map(|&x| (x * 3.0).exp()).collect())
            .collect();
        assert_eq!(
            friedman_ranks(&means).unwrap(),
            friedman_ranks(&transformed).unwrap()
        );
    }

    #[test]
    fn friedman_rejects_ragged_input() {
        assert!(friedman_ranks(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    fn names() -> Vec<String> {
        reference::ALGORITHMS.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn holm_reproduces_reference_oi_pvalues() {
        let ranks = vec![1.0, 30.0 / 11.0, 25.0 / 11.0];
        let comparisons = holm_posthoc(&ranks, &names(), 11, "covns").unwrap();
        assert_eq!(comparisons.len(), 2);
        let pvns = &comparisons[0];
        let svns = &comparisons[1];
        assert_eq!(pvns.algorithm, "pvns");
        assert!((pvns.unadjusted_p - 0.000051).abs() < 1e-6);
        assert!((pvns.adjusted_p - 0.000102).abs() < 1e-6);
        assert!((svns.unadjusted_p - 0.002838).abs() < 1e-6);
        assert!((svns.adjusted_p - 0.002838).abs() < 1e-6);
    }

    #[test]
    fn holm_reproduces_reference_ui_pvalues() {
        // The z formula fixes the assignment: the larger rank gap (svns)
        // carries the smaller p-value.
        let ranks = vec![19.0 / 11.0, 22.5 / 11.0, 24.5 / 11.0];
        let comparisons = holm_posthoc(&ranks, &names(), 11, "covns").unwrap();
        let pvns = &comparisons[0];
        let svns = &comparisons[1];
        assert!((pvns.unadjusted_p - 0.455545).abs() < 1e-6);
        assert!((svns.unadjusted_p - 0.240955).abs() < 1e-6);
        assert!((pvns.adjusted_p - 0.481909).abs() < 1e-6);
        assert!((svns.adjusted_p - 0.481909).abs() < 1e-6);
    }

    #[test]
    fn holm_excludes_the_control_and_is_monotone() {
        let ranks = vec![1.2, 2.0, 2.8, 2.0];
        let algorithms: Vec<String> =
            ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let comparisons = holm_posthoc(&ranks, &algorithms, 9, "a").unwrap();
        assert_eq!(comparisons.len(), 3);
        assert!(comparisons.iter().all(|c| c.algorithm != "a"));
        for c in &comparisons {
            assert!(c.adjusted_p >= c.unadjusted_p - 1e-15);
        }
        let mut sorted: Vec<&HolmComparison> = comparisons.iter().collect();
        sorted.sort_by(|x, y| x.unadjusted_p.partial_cmp(&y.unadjusted_p).unwrap());
        for pair in sorted.windows(2) {
            assert!(pair[1].adjusted_p >= pair[0].adjusted_p);
        }
    }

    #[test]
    fn holm_requires_known_control() {
        let ranks = vec![1.0, 2.0];
        let algorithms: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            holm_posthoc(&ranks, &algorithms, 3, "zzz"),
            Err(Error::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn report_over_reference_means_matches_reference_tables() {
        let mut matrix = ResultMatrix::new();
        for (a, algorithm) in reference::ALGORITHMS.iter().enumerate() {
            for (i, mean) in reference::OI_MEANS[a].iter().enumerate() {
                matrix.push(algorithm, &format!("OI_{}_8", 50 + 5 * i), *mean);
            }
        }
        let report = build_report(&matrix, "covns").unwrap();
        assert!((report.mean_ranks[0] - 1.0).abs() < 1e-12);
        assert!((report.mean_ranks[1] - 2.7273).abs() < 1e-4);
        assert!((report.mean_ranks[2] - 2.2727).abs() < 1e-4);
        assert!((report.comparisons[0].unadjusted_p - 0.000051).abs() < 1e-6);
        let text = report.render_text();
        assert!(text.contains("Friedman mean ranks"));
        assert!(text.contains("Holm post-hoc vs control covns"));
    }

    #[test]
    fn report_with_single_algorithm_has_no_posthoc_section() {
        let mut matrix = ResultMatrix::new();
        matrix.push("covns", "x", 0.5);
        matrix.push("covns", "y", 0.4);
        let report = build_report(&matrix, "covns").unwrap();
        assert_eq!(report.mean_ranks, vec![1.0]);
        assert!(report.comparisons.is_empty());
        assert!(!report.render_text().contains("Holm post-hoc"));
    }

    #[test]
    fn report_rejects_uneven_runs() {
        let mut matrix = ResultMatrix::new();
        matrix.push("a", "x", 0.5);
        matrix.push("a", "x", 0.6);
        matrix.push("b", "x", 0.4);
        assert!(matches!(
            build_report(&matrix, "a"),
            Err(Error::UnevenRuns { .. })
        ));
    }

    #[test]
    fn csv_roundtrip_and_line_numbered_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.csv");
        std::fs::write(
            &good,
            "algorithm,instance,run_index,fitness\na,x,0,0.5\na,x,1,0.6\nb,x,0,0.4\nb,x,1,0.3\n",
        )
        .unwrap();
        let matrix = ResultMatrix::read_csv(&good).unwrap();
        assert_eq!(matrix.cell("a", "x").unwrap(), &[0.5, 0.6]);
        assert_eq!(matrix.cell("b", "x").unwrap(), &[0.4, 0.3]);

        let bad = dir.path().join("bad.csv");
        std::fs::write(
            &bad,
            "algorithm,instance,run_index,fitness\na,x,0,0.5\na,x,1,oops\n",
        )
        .unwrap();
        match ResultMatrix::read_csv(&bad) {
            Err(Error::MalformedCsvRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed row error, got {other:?}"),
        }
    }

    #[test]
    fn harness_schema_with_best_fitness_column_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        std::fs::write(
            &path,
            "algorithm,instance,run_index,best_fitness,evaluations_used,wall_time_ms\n\
             covns,OI_20_4,0,0.31,1000,12\n",
        )
        .unwrap();
        let matrix = ResultMatrix::read_csv(&path).unwrap();
        assert_eq!(matrix.cell("covns", "OI_20_4").unwrap(), &[0.31]);
    }
}
