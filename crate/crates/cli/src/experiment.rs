use crate::artifacts::OutDir;
use crate::{data_err, run_err, CliError, ExperimentArgs, Preset};
use gibbs_ot::io;
use gibbs_ot::presets;
use gibbs_ot::runner::run_annealed;
use gibbs_ot::sampler::{init_chain, OtProblem};
use gibbs_ot::sinkhorn::{sinkhorn, SinkhornConfig};
use gibbs_ot::{solve_exact, TemperatureSchedule};
use serde::Serialize;

/// Desk-scale grid size for both presets.
const GRID: usize = 64;
const BUDGETS: [u32; 6] = [1, 10, 50, 200, 1000, 5000];

#[derive(Serialize)]
struct BudgetRow {
    budget: u32,
    gibbs_cost: f64,
    gibbs_gap: f64,
    sinkhorn_cost: f64,
    sinkhorn_gap: f64,
}

pub fn run(args: &ExperimentArgs) -> Result<(), CliError> {
    let out = OutDir::create(&args.out_dir)?;
    let (p, q, cost) = match args.preset {
        Preset::Toy1d => presets::toy1d(GRID).map_err(run_err)?,
        Preset::Coulomb1d => presets::coulomb1d(GRID).map_err(run_err)?,
    };
    let problem = OtProblem::new(&p, &q, &cost).map_err(run_err)?;
    let epsilon = args.epsilon.unwrap_or(0.5 / GRID as f64);

    let exact = solve_exact(&p, &q, &cost).map_err(run_err)?;
    io::write_matrix_csv(
        &out.path("plan_exact.csv"),
        GRID,
        GRID,
        &exact.plan.to_dense(),
    )
    .map_err(data_err)?;

    let mut rows = Vec::with_capacity(BUDGETS.len());
    for budget in BUDGETS {
        // fresh annealed chain per budget, schedule horizon = the budget
        let mut state = init_chain(&problem, args.seed);
        let mut schedule = TemperatureSchedule::geometric(2.0, budget, GRID as u32)
            .map_err(|e| CliError::Config(e.to_string()))?;
        run_annealed(&mut state, &problem, &mut schedule, budget, |_| {}).map_err(run_err)?;
        let gibbs_plan = state.recover_plan(&problem).map_err(run_err)?;
        io::write_matrix_csv(
            &out.path(&format!("plan_gibbs_{budget}.csv")),
            GRID,
            GRID,
            &gibbs_plan.to_dense(),
        )
        .map_err(data_err)?;
        let gibbs_cost = state.envelope_energy(&problem);

        let config = SinkhornConfig::new(epsilon, budget, 1e-300)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let sink = sinkhorn(&p, &q, &cost, &config).map_err(run_err)?;
        io::write_matrix_csv(
            &out.path(&format!("plan_sinkhorn_{budget}.csv")),
            GRID,
            GRID,
            &sink.plan.to_dense(),
        )
        .map_err(data_err)?;
        let sinkhorn_cost = sink.plan.transport_cost(&cost).map_err(run_err)?;

        rows.push(BudgetRow {
            budget,
            gibbs_cost,
            gibbs_gap: (gibbs_cost - exact.cost).abs() / exact.cost.abs().max(f64::MIN_POSITIVE),
            sinkhorn_cost,
            sinkhorn_gap: (sinkhorn_cost - exact.cost).abs()
                / exact.cost.abs().max(f64::MIN_POSITIVE),
        });
    }

    out.write_json(
        "summary.json",
        &serde_json::json!({
            "preset": format!("{:?}", args.preset).to_lowercase(),
            "grid": GRID,
            "epsilon": epsilon,
            "exact_cost": exact.cost,
            "budgets": rows,
        }),
    )?;
    out.write_meta("experiment", serde_json::json!({ "seed": args.seed }))?;
    Ok(())
}
