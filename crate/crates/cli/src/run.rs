//! Dispatch of a validated job to the core modules.

use serde::Serialize;
use serde_json::{json, Value};

use polarity_core::conditions::{
    check_comparability, check_condition, check_nqprime, classify_sufficiency, epsilon_of_delta, inherited_region,
    TrendPoint,
};
use polarity_core::fourier::{
    hausdorff_young_check, lower_bound_check, restricted_weak_type, rwt_sweep, strong_type_ratio,
};
use polarity_core::geometry::{mahler_volume, polar, volume, Estimate, EstimateMethod, Region};
use polarity_core::search::{conjecture_sup_search, dilation_ray, mahler_search, SearchReport};
use polarity_core::Error;

use crate::config::Job;

/// How the headline number of a report was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct Accuracy {
    /// `exact`, `quadrature`, `monte_carlo` or `sampled` (a supremum over
    /// sampled configurations, exact or Monte Carlo per evaluation).
    pub method: &'static str,
    /// Absolute error of the headline number, when one is propagated.
    pub error: Option<f64>,
}

impl Accuracy {
    fn exact() -> Self {
        Self { method: "exact", error: Some(0.0) }
    }

    fn of(e: &Estimate) -> Self {
        let method = match e.method {
            EstimateMethod::Exact => "exact",
            EstimateMethod::Quadrature => "quadrature",
            EstimateMethod::MonteCarlo { .. } => "monte_carlo",
        };
        Self { method, error: Some(e.abs_error) }
    }

    fn sampled(error: f64) -> Self {
        Self { method: if error > 0.0 { "monte_carlo" } else { "sampled" }, error: Some(error) }
    }

    fn quadrature() -> Self {
        Self { method: "quadrature", error: None }
    }
}

/// Everything a run emits besides the manifest and config copy.
pub struct Outputs {
    pub accuracy: Accuracy,
    pub report: Value,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
}

fn trend_csv(trend: &[TrendPoint]) -> (String, String) {
    ("trend.csv".into(), csv(&["scale", "value"], trend.iter().map(|p| (p.scale, p.value))))
}

fn trajectory_csv(r: &SearchReport) -> (String, String) {
    (
        "trajectory.csv".into(),
        csv(&["start", "step", "value"], r.trajectory.iter().map(|p| (p.start, p.step, p.value))),
    )
}

pub fn execute(job: &Job) -> Result<Outputs, Error> {
    Ok(match job {
        Job::Polar { body } => {
            let p = polar(body)?;
            let text = serde_json::to_string_pretty(&p).expect("bodies serialize") + "\n";
            Outputs {
                accuracy: Accuracy::exact(),
                report: json!({ "body": body, "polar": p }),
                files: vec![("polar.json".into(), text)],
            }
        }
        Job::Mahler { body, method } => {
            let v = volume(body, method)?;
            let pv = volume(&polar(body)?, method)?;
            let m = mahler_volume(body, method)?;
            Outputs {
                accuracy: Accuracy::of(&m),
                report: json!({ "volume": v, "polar_volume": pv, "mahler_volume": m }),
                files: vec![],
            }
        }
        Job::CheckCondition { pair, exps, family, sampling } => {
            let r = check_condition(pair, exps, *family, sampling)?;
            Outputs { accuracy: Accuracy::sampled(r.sup_error), report: to_value(&r), files: vec![trend_csv(&r.trend)] }
        }
        Job::CheckNqprime { pair, exps, sampling } => {
            let r = check_nqprime(pair, exps, sampling)?;
            Outputs { accuracy: Accuracy::sampled(r.sup_error), report: to_value(&r), files: vec![trend_csv(&r.trend)] }
        }
        Job::Comparability { mu1, mu2, delta, sampling } => {
            let r = check_comparability(mu1, mu2, *delta, sampling)?;
            Outputs { accuracy: Accuracy::sampled(0.0), report: to_value(&r), files: vec![trend_csv(&r.trend)] }
        }
        Job::EpsilonMap { c, n, deltas } => {
            let rows = deltas
                .iter()
                .map(|&d| epsilon_of_delta(d, *c, *n).map(|e| (d, e)))
                .collect::<Result<Vec<_>, _>>()?;
            let report = json!({
                "c": c,
                "n": n,
                "rows": rows.iter().map(|(d, e)| json!({ "delta": d, "epsilon": e })).collect::<Vec<_>>(),
            });
            Outputs {
                accuracy: Accuracy::exact(),
                report,
                files: vec![("epsilon_map.csv".into(), csv(&["delta", "epsilon"], rows))],
            }
        }
        Job::Region { exps, case, radius } => {
            let r = inherited_region(exps, *case, *radius)?;
            Outputs { accuracy: Accuracy::exact(), report: to_value(&r), files: vec![] }
        }
        Job::Classify { pair, exps, config } => {
            let r = classify_sufficiency(pair, exps, config)?;
            let files = vec![trend_csv(&r.condition.trend)];
            Outputs { accuracy: Accuracy::sampled(r.condition.sup_error), report: to_value(&r), files }
        }
        Job::LowerBound { body, samples, seed, grid } => {
            let r = lower_bound_check(body, *samples, *seed, grid)?;
            Outputs { accuracy: Accuracy::quadrature(), report: to_value(&r), files: vec![] }
        }
        Job::Rwt { pair, exps, set, levels, scales } => match (scales, set) {
            (Some(scales), Region::Body(body)) => {
                let r = rwt_sweep(pair, exps, body, scales, levels)?;
                let rows = r.scales.iter().copied().zip(r.ratios.iter().copied());
                let files = vec![("sweep.csv".into(), csv(&["scale", "ratio"], rows))];
                Outputs { accuracy: Accuracy::quadrature(), report: to_value(&r), files }
            }
            _ => {
                let r = restricted_weak_type(pair, exps, set, levels)?;
                let rows = r.alphas.iter().copied().zip(r.measures.iter().copied());
                let files = vec![("levels.csv".into(), csv(&["alpha", "measure"], rows))];
                Outputs { accuracy: Accuracy::quadrature(), report: to_value(&r), files }
            }
        },
        Job::StrongType { pair, exps, functions, grid } => {
            let r = strong_type_ratio(pair, exps, functions, grid)?;
            let rows = r.rows.iter().enumerate().map(|(i, row)| (i, row.lhs, row.rhs, row.ratio));
            let files = vec![("rows.csv".into(), csv(&["function", "lhs", "rhs", "ratio"], rows))];
            Outputs { accuracy: Accuracy::quadrature(), report: to_value(&r), files }
        }
        Job::Hy { function, p, grid } => {
            let r = hausdorff_young_check(function, *p, grid)?;
            Outputs { accuracy: Accuracy::quadrature(), report: to_value(&r), files: vec![] }
        }
        Job::Conjecture { pair, exps, search, ray } => {
            let r = conjecture_sup_search(pair, exps, search)?;
            let mut files = vec![trajectory_csv(&r)];
            let mut report = json!({ "search": r });
            if let Some((start, scales)) = ray {
                let start = start.as_ref().unwrap_or(&r.best_config);
                let ray = dilation_ray(pair, exps, start, scales, search.mc_samples, search.seed)?;
                let rows = ray.points.iter().map(|p| (p.scale, p.value, p.error, p.u_part, p.w_part));
                files.push(("ray.csv".into(), csv(&["scale", "value", "error", "u_part", "w_part"], rows)));
                report["ray"] = to_value(&ray);
            }
            Outputs { accuracy: Accuracy::sampled(r.best_error), report, files }
        }
        Job::MahlerSearch { dim, direction, search } => {
            let r = mahler_search(*dim, search, *direction)?;
            let files = vec![trajectory_csv(&r)];
            Outputs { accuracy: Accuracy::sampled(r.best_error), report: to_value(&r), files }
        }
    })
}
