//! Subcommand implementations. Each writes its artifacts under an output
//! path and returns what it produced.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dfljam_core::attack::{
    attack_all, deploy_degree, deploy_mincut, mcba_s1, mcba_s2, ndba_s1, ndba_s2, no_attack, random_s1, random_s2,
    Algorithm, AttackPlan, Scenario,
};
use dfljam_core::dfl::{Experiment, ExperimentResult, RoundState};
use dfljam_core::fnn::encode_checkpoint;
use dfljam_core::graph::{build_topology, Topology, TopologyFile};
use dfljam_core::report::{emit, plot_data, row_slug, ComparisonTable, Format, MetricsWriter, RowGroup, TableRow};
use dfljam_core::seed::{stream, Purpose};
use dfljam_core::signal::{build_datasets, Datasets};
use dfljam_core::{Error, Result};

use crate::config::ExperimentConfig;

/// Row set of a comparison table, in display order.
pub const TABLE_ROWS: [(Scenario, Algorithm); 8] = [
    (Scenario::None, Algorithm::None),
    (Scenario::None, Algorithm::All),
    (Scenario::S1, Algorithm::Mcba),
    (Scenario::S1, Algorithm::Ndba),
    (Scenario::S1, Algorithm::Random),
    (Scenario::S2, Algorithm::Mcba),
    (Scenario::S2, Algorithm::Ndba),
    (Scenario::S2, Algorithm::Random),
];

/// A resolved config with its topology, budgets clamped to fit it.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub topology: Topology,
    pub warnings: Vec<String>,
}

pub fn prepare(mut config: ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let topology = match &config.topology_file {
        Some(path) => TopologyFile::load(path)?,
        None => build_topology(
            config.topology,
            &config.layout(),
            &mut stream(config.seed, Purpose::Topology, &[]),
        )?,
    };
    let warnings = config.clamp_budgets(&topology);
    Ok(Prepared {
        config,
        topology,
        warnings,
    })
}

fn scenario_index(s: Scenario) -> u64 {
    match s {
        Scenario::None => 0,
        Scenario::S1 => 1,
        Scenario::S2 => 2,
    }
}

/// Table group a run belongs to: the two baselines ignore the scenario.
pub fn row_scenario(scenario: Scenario, algo: Algorithm) -> Scenario {
    match algo {
        Algorithm::None | Algorithm::All => Scenario::None,
        _ => scenario,
    }
}

/// Side length range of the deployment area, used for random jammer
/// placement: the bounding square of the node positions.
fn deployment_area(topology: &Topology) -> (f64, f64) {
    let coords = topology.positions().iter().flat_map(|p| [p.x, p.y]);
    coords.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)))
}

pub fn make_plan(prepared: &Prepared, scenario: Scenario, algo: Algorithm) -> Result<AttackPlan> {
    let c = &prepared.config;
    let topo = &prepared.topology;
    let rng = || stream(c.seed, Purpose::Plan, &[scenario_index(scenario)]);
    let plan = match (algo, scenario) {
        (Algorithm::None, _) => no_attack(),
        (Algorithm::All, _) => attack_all(topo),
        (_, Scenario::None) => return Err(Error::config("scenario", format!("{algo} needs scenario s1 or s2"))),
        (Algorithm::Mcba, Scenario::S1) => mcba_s1(topo, c.mb)?,
        (Algorithm::Ndba, Scenario::S1) => ndba_s1(topo, c.mb),
        (Algorithm::Random, Scenario::S1) => random_s1(topo, c.mb, &mut rng()),
        (Algorithm::Mcba, Scenario::S2) => mcba_s2(topo, &deploy_mincut(topo, c.na, c.rj)?, c.md)?,
        (Algorithm::Ndba, Scenario::S2) => ndba_s2(topo, &deploy_degree(topo, c.na, c.rj)?, c.md),
        (Algorithm::Random, Scenario::S2) => random_s2(topo, c.na, c.rj, deployment_area(topo), c.md, &mut rng())?,
    };
    plan.validate(topo, (scenario == Scenario::S2).then_some(c.na))?;
    Ok(plan)
}

pub fn make_datasets(prepared: &Prepared) -> Result<Datasets> {
    let c = &prepared.config;
    build_datasets(&prepared.topology, &c.channel(), c.sizes(), c.seed)
}

/// Runs one experiment. With `metrics = Some((dir, prefix))`, per-round
/// metrics stream to `dir/{prefix}node_metrics.csv` and
/// `dir/{prefix}round_metrics.csv`.
pub fn run_plan(
    prepared: &Prepared,
    datasets: &Datasets,
    plan: &AttackPlan,
    metrics: Option<(&Path, &str)>,
) -> Result<(ExperimentResult, RoundState)> {
    let c = &prepared.config;
    let exp = Experiment::from_datasets(
        &prepared.topology,
        plan,
        datasets,
        c.fnn_spec(),
        c.train_config(),
        c.seed,
    )?;
    let Some((dir, prefix)) = metrics else {
        return exp.run_with(&c.convergence(), |_, _| {});
    };
    let open = |name: &str| -> Result<BufWriter<File>> {
        let path = dir.join(format!("{prefix}{name}"));
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|source| Error::File { path, source })
    };
    let mut writer = MetricsWriter::new(open("node_metrics.csv")?, open("round_metrics.csv")?)?;
    let mut io_error = None;
    let out = exp.run_with(&c.convergence(), |_, m| {
        if io_error.is_none() {
            io_error = writer.record(m).err();
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    writer.finish()?;
    Ok(out)
}

fn write(path: PathBuf, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, bytes).map_err(|source| Error::File { path, source })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::File {
        path: dir.to_path_buf(),
        source,
    })
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn topology_json(prepared: &Prepared) -> Result<String> {
    Ok(TopologyFile::from_topology(&prepared.topology).to_json()? + "\n")
}

fn table_label(prepared: &Prepared) -> String {
    match &prepared.config.topology_file {
        Some(p) => p.display().to_string(),
        None => prepared.config.topology.to_string(),
    }
}

fn write_table(dir: &Path, table: &ComparisonTable) -> Result<()> {
    write(dir.join("summary.csv"), emit(table, Format::Csv)?)?;
    write(dir.join("summary.json"), emit(table, Format::Json)?)?;
    for row in &table.rows {
        write(dir.join(format!("rounds_{}.tsv", row.slug())), plot_data(row))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Save every node model after the last round.
    pub checkpoint: bool,
}

/// Runs the configured scenario and algorithm, writing manifest, topology,
/// plan, metrics streams and summary files into `dir`.
pub fn cmd_run(prepared: &Prepared, dir: &Path, options: RunOptions) -> Result<ComparisonTable> {
    let c = &prepared.config;
    create_dir(dir)?;
    write(dir.join("manifest.json"), json_bytes(c)?)?;
    write(dir.join("topology.json"), topology_json(prepared)?)?;
    let plan = make_plan(prepared, c.scenario, c.algo)?;
    write(dir.join("plan.json"), plan.to_json()? + "\n")?;

    let datasets = make_datasets(prepared)?;
    let (result, state) = run_plan(prepared, &datasets, &plan, Some((dir, "")))?;
    if options.checkpoint {
        write(dir.join("checkpoint.dflm"), encode_checkpoint(&state.models))?;
    }
    let mut table = ComparisonTable::new(table_label(prepared));
    table.push(TableRow::new(row_scenario(c.scenario, c.algo), c.algo, &result)?)?;
    write_table(dir, &table)?;
    Ok(table)
}

/// Runs every row of [`TABLE_ROWS`] on one topology with a shared master
/// seed, so all rows see the same data and initial models.
pub fn cmd_table(prepared: &Prepared, dir: &Path) -> Result<ComparisonTable> {
    create_dir(dir)?;
    write(dir.join("manifest.json"), json_bytes(&prepared.config)?)?;
    write(dir.join("topology.json"), topology_json(prepared)?)?;
    let datasets = make_datasets(prepared)?;
    let mut table = ComparisonTable::new(table_label(prepared));
    for (scenario, algo) in TABLE_ROWS {
        let plan = make_plan(prepared, scenario, algo)?;
        let slug = row_slug(RowGroup::for_scenario(scenario), algo);
        write(dir.join(format!("plan_{slug}.json")), plan.to_json()? + "\n")?;
        let (result, _) = run_plan(prepared, &datasets, &plan, Some((dir, &format!("{slug}_"))))?;
        table.push(TableRow::new(scenario, algo, &result)?)?;
    }
    write_table(dir, &table)?;
    Ok(table)
}
