//! Task registry: each subcommand is a trait object dispatched by name.

use serde_json::json;

use ahlab::gauge_flow;
use ahlab::{eigenfunction, einstein, indicial, io, spectrum};
use ahlab::{Error, Result};

use crate::config::RunConfig;

pub struct TaskOutput {
    pub json: serde_json::Value,
    /// `(quantity name, CSV text)`.
    pub tables: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

pub trait Task {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput>;
}

pub fn registry() -> Vec<Box<dyn Task>> {
    vec![
        Box::new(IndicialTask),
        Box::new(SullivanTask),
        Box::new(Lambda0Task),
        Box::new(EigenfunctionTask),
        Box::new(CertifyTask),
        Box::new(EinsteinShootTask),
        Box::new(SweepTask),
        Box::new(FlowCheckTask),
    ]
}

pub fn find(name: &str) -> Result<Box<dyn Task>> {
    let all = registry();
    let names: Vec<&str> = all.iter().map(|t| t.name()).collect();
    all.into_iter()
        .find(|t| t.name() == name)
        .ok_or_else(|| Error::invalid(format!("unknown task `{name}`; known: {names:?}")))
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn require<T: Copy>(field: Option<T>, what: &str) -> Result<T> {
    field.ok_or_else(|| Error::invalid(format!("missing required input `{what}`")))
}

fn load_metric(cfg: &RunConfig) -> Result<ahlab::geometry::WarpedMetric> {
    let path = cfg
        .metric
        .as_ref()
        .ok_or_else(|| Error::invalid("missing required input `metric`"))?;
    io::read_metric(path)
}

fn default_radii(t_min: f64, t_max: f64) -> Vec<f64> {
    [0.62, 0.73, 0.84, 0.95]
        .iter()
        .map(|f| t_min + f * (t_max - t_min))
        .collect()
}

// ---------------------------------------------------------------------------

struct IndicialTask;

impl Task for IndicialTask {
    fn name(&self) -> &'static str {
        "indicial"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let n = require(cfg.n, "n")?;
        let kappa = require(cfg.kappa, "kappa")?;
        let roots = indicial::indicial_roots(n, kappa)?;
        let mut out = serde_json::to_value(&roots).unwrap();
        if let Some(s) = cfg.s {
            out["s"] = json!(s);
            out["admissible"] = json!(indicial::admissible(n, kappa, s));
        }
        Ok(TaskOutput {
            json: out,
            tables: vec![],
            warnings: vec![],
        })
    }
}

struct SullivanTask;

impl Task for SullivanTask {
    fn name(&self) -> &'static str {
        "sullivan"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let n = require(cfg.n, "n")?;
        let d = require(cfg.d, "d")?;
        let lambda0 = spectrum::sullivan_lambda0(n, d)?;
        Ok(TaskOutput {
            json: json!({ "n": n, "d": d, "lambda0": lambda0 }),
            tables: vec![],
            warnings: vec![],
        })
    }
}

struct Lambda0Task;

impl Task for Lambda0Task {
    fn name(&self) -> &'static str {
        "lambda0"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let metric = load_metric(cfg)?;
        let radii = match &cfg.schedule {
            Some(s) => s.clone(),
            None => default_radii(metric.grid.t_min, metric.grid.t_max),
        };
        let est = spectrum::lambda0_estimate(&metric, &radii)?;
        let deepest = radii.iter().cloned().fold(f64::MIN, f64::max);
        let eigenvalues = spectrum::shoot_eigenvalues(&metric, deepest, 1e-8)?;
        let table = csv(
            "truncation_radius,lowest_dirichlet_eigenvalue",
            est.truncation_values.iter().map(|&(t, l)| vec![t, l]),
        );
        let json = json!({
            "estimate": est,
            "eigenvalues_below_threshold": eigenvalues,
        });
        Ok(TaskOutput {
            json,
            tables: vec![("lambda0_vs_truncation".into(), table)],
            warnings: vec![],
        })
    }
}

struct EigenfunctionTask;

impl Task for EigenfunctionTask {
    fn name(&self) -> &'static str {
        "eigenfunction"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let metric = load_metric(cfg)?;
        let rep = eigenfunction::solve(&metric)?;
        let sub = eigenfunction::subharmonicity_check(&metric, &rep)?;
        let rows = rep.points.iter().enumerate().map(|(j, &t)| {
            let r = eigenfunction::defining_r(t);
            let v = rep.beta + rep.w[j] / r;
            let g = rep.du[j] * rep.du[j] - rep.u[j] * rep.u[j];
            (j, t, v, g)
        });
        let table_u = csv(
            "t,u",
            rep.points.iter().zip(&rep.u).map(|(&t, &u)| vec![t, u]),
        );
        let table_v = csv("t,v", rows.clone().map(|(_, t, v, _)| vec![t, v]));
        let table_g = csv("t,G", rows.map(|(_, t, _, g)| vec![t, g]));
        let json = json!({
            "beta": rep.beta,
            "boundary_scalar": rep.boundary_scalar,
            "v_limit": rep.v_limit,
            "gradient_defect_limit": rep.g_limit,
            "residual": rep.residual,
            "uniqueness_defect": rep.uniqueness_defect,
            "subharmonicity": sub,
        });
        Ok(TaskOutput {
            json,
            tables: vec![
                ("u".into(), table_u),
                ("v".into(), table_v),
                ("G".into(), table_g),
            ],
            warnings: vec![],
        })
    }
}

struct CertifyTask;

impl Task for CertifyTask {
    fn name(&self) -> &'static str {
        "certify"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let metric = load_metric(cfg)?;
        let s = require(cfg.s, "s")?;
        let rep = eigenfunction::solve(&metric)?;
        let cert = eigenfunction::certificate(&metric, &rep, s, cfg.tol)?;
        Ok(TaskOutput {
            json: serde_json::to_value(&cert).unwrap(),
            tables: vec![],
            warnings: vec![
                "certified bound is conditional on the positive-supersolution principle".into(),
            ],
        })
    }
}

struct EinsteinShootTask;

impl Task for EinsteinShootTask {
    fn name(&self) -> &'static str {
        "einstein-shoot"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let p = require(cfg.parameter, "parameter")?;
        let rep = einstein::shoot(p, cfg.t_max, cfg.points)?;
        let mut tables = vec![];
        let mut json = json!({
            "parameter": rep.parameter,
            "outcome": rep.outcome,
            "berger_parameter": rep.berger_parameter,
            "einstein_residual": rep.einstein_residual,
            "constraint_drift": rep.constraint_drift,
        });
        if let Some(metric) = &rep.metric {
            json["metric"] = serde_json::to_value(io::metric_to_file(metric)).unwrap();
            let a = metric.profile_values(0);
            let c = metric.profile_values(1);
            tables.push((
                "profile".to_string(),
                csv(
                    "t,a,c",
                    metric
                        .grid
                        .points
                        .iter()
                        .enumerate()
                        .map(|(j, &t)| vec![t, a[j], c[j]]),
                ),
            ));
        }
        Ok(TaskOutput {
            json,
            tables,
            warnings: vec![],
        })
    }
}

struct SweepTask;

impl Task for SweepTask {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let schedule = cfg
            .schedule
            .as_ref()
            .ok_or_else(|| Error::invalid("missing required input `schedule`"))?;
        // Rows are independent; order is restored by the Berger sort.
        use rayon::prelude::*;
        let rows = schedule
            .par_iter()
            .map(|&p| einstein::sweep_row(p, cfg.t_max, cfg.points))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = rows;
        rows.sort_by(|a, b| match (a.berger_parameter, b.berger_parameter) {
            (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.parameter.partial_cmp(&b.parameter).unwrap(),
        });
        let warnings: Vec<String> = rows
            .iter()
            .flat_map(|r| {
                r.failures
                    .iter()
                    .map(move |f| format!("parameter {}: {f}", r.parameter))
            })
            .collect();
        let table = csv(
            "berger_t,parameter,boundary_scalar,lambda0,lambda0_error,eigenvalues_below_threshold,gradient_defect,gradient_defect_expected,certified",
            rows.iter().map(|r| {
                vec![
                    r.berger_parameter.unwrap_or(f64::NAN),
                    r.parameter,
                    r.boundary_scalar.unwrap_or(f64::NAN),
                    r.lambda0.as_ref().map(|l| l.value).unwrap_or(f64::NAN),
                    r.lambda0.as_ref().map(|l| l.error).unwrap_or(f64::NAN),
                    r.eigenvalues_below_threshold.len() as f64,
                    r.gradient_defect_boundary.unwrap_or(f64::NAN),
                    r.gradient_defect_expected.unwrap_or(f64::NAN),
                    r.certificate
                        .as_ref()
                        .map(|c| c.certified as u8 as f64)
                        .unwrap_or(f64::NAN),
                ]
            }),
        );
        let lambda_table = csv(
            "berger_t,lambda0,error",
            rows.iter().filter(|r| r.lambda0.is_some()).map(|r| {
                let l = r.lambda0.as_ref().unwrap();
                vec![r.berger_parameter.unwrap_or(f64::NAN), l.value, l.error]
            }),
        );
        Ok(TaskOutput {
            json: serde_json::to_value(&rows).unwrap(),
            tables: vec![
                ("rows".into(), table),
                ("lambda0_vs_berger".into(), lambda_table),
            ],
            warnings,
        })
    }
}

struct FlowCheckTask;

impl Task for FlowCheckTask {
    fn name(&self) -> &'static str {
        "flow-check"
    }

    fn run(&self, cfg: &RunConfig) -> Result<TaskOutput> {
        let path = cfg
            .field
            .as_ref()
            .ok_or_else(|| Error::invalid("missing required input `field`"))?;
        let field = io::read_flow_field(path)?;
        let alpha = require(cfg.alpha, "alpha")?;
        let t_end = require(cfg.time, "time")?;
        let dim = field.dim();
        let x = vec![0.1; dim];
        let dir = vec![1.0; dim];
        let mut u0 = vec![0.0; dim];
        u0[0] = 1.0;
        let separations: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let rep = gauge_flow::holder_check(&field, &x, &dir, &u0, &separations, alpha, t_end)?;
        let table = csv(
            "separation,deviation,bound",
            rep.samples.iter().map(|&(h, d, b)| vec![h, d, b]),
        );
        Ok(TaskOutput {
            json: serde_json::to_value(&rep).unwrap(),
            tables: vec![("deviation_vs_separation".into(), table)],
            warnings: vec![],
        })
    }
}
