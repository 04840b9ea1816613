//! Run results and their on-disk form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{Prepared, Scenario, StepResult, UnitClass, UnitKind};

/// Day totals per scenario. Energies in kWh, prices in $/MWh, costs in $.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub intervals: usize,
    /// Mean post-step SOC per dissipation class over the run.
    pub soc_mean: Vec<f64>,
    pub total_cost: f64,
    pub supply_cost: f64,
    pub j1: f64,
    pub j2: f64,
    pub penalty: f64,
    pub j3: f64,
    pub dg_energy: f64,
    pub bess_energy: f64,
    pub class_energy: Vec<f64>,
    pub res_deterministic: f64,
    pub res_worst_case: f64,
    pub res_used: f64,
    pub demand: f64,
    pub served: f64,
    pub unserved: f64,
    pub mean_clear_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub der_classes: Vec<f64>,
    pub unit_classes: Vec<UnitClass>,
    pub interval_duration: f64,
    /// SOC weight the run actually used.
    pub j3_weight: f64,
    /// Worst-case RES per interval, kW.
    pub res_worst_case: Vec<f64>,
    pub steps: Vec<StepResult>,
    /// Running sum of `j` rounded to micro-dollars, as printed.
    pub cumulative_cost: Vec<f64>,
    pub summary: Summary,
}

fn micros(x: f64) -> i64 {
    (x * 1e6).round() as i64
}

fn fmt_micros(m: i64) -> String {
    let sign = if m < 0 { "-" } else { "" };
    let a = m.unsigned_abs();
    format!("{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
}

fn f6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

impl RunReport {
    pub fn new(prepared: &Prepared, steps: Vec<StepResult>) -> Self {
        let res_worst_case: Vec<f64> = prepared.forecasts.worst_case[..steps.len()].to_vec();
        Self::from_parts(
            prepared.scenario,
            prepared.der_classes.clone(),
            prepared.classes.clone(),
            prepared.horizon.interval_duration,
            prepared.effective_j3_weight(),
            res_worst_case,
            steps,
        )
    }

    pub fn from_parts(
        scenario: Scenario,
        der_classes: Vec<f64>,
        unit_classes: Vec<UnitClass>,
        interval_duration: f64,
        j3_weight: f64,
        res_worst_case: Vec<f64>,
        steps: Vec<StepResult>,
    ) -> Self {
        let dt = interval_duration;
        let n = steps.len();
        let mut running = 0i64;
        let cumulative_cost = steps
            .iter()
            .map(|s| {
                running += micros(s.j);
                running as f64 / 1e6
            })
            .collect();
        let sum = |f: &dyn Fn(&StepResult) -> f64| steps.iter().map(f).sum::<f64>();
        let mean = |total: f64| if n == 0 { 0.0 } else { total / n as f64 };
        let soc_mean = (0..der_classes.len())
            .map(|c| mean(sum(&|s| s.soc_mean[c])))
            .collect();
        let class_energy: Vec<f64> = (0..unit_classes.len())
            .map(|c| sum(&|s| s.class_power[c]) * dt)
            .collect();
        let kind_energy = |kind: UnitKind| -> f64 {
            unit_classes
                .iter()
                .zip(&class_energy)
                .filter(|(u, _)| u.kind == kind)
                .map(|(_, e)| e)
                .sum()
        };
        let summary = Summary {
            intervals: n,
            soc_mean,
            total_cost: sum(&|s| s.j),
            supply_cost: sum(&|s| s.j1 + s.j2 + s.penalty),
            j1: sum(&|s| s.j1),
            j2: sum(&|s| s.j2),
            penalty: sum(&|s| s.penalty),
            j3: sum(&|s| s.j3),
            dg_energy: kind_energy(UnitKind::Dg),
            bess_energy: kind_energy(UnitKind::Bess),
            class_energy,
            res_deterministic: sum(&|s| s.res_available) * dt,
            res_worst_case: res_worst_case.iter().sum::<f64>() * dt,
            res_used: sum(&|s| s.res_used) * dt,
            demand: sum(&|s| s.demand) * dt,
            served: sum(&|s| s.served) * dt,
            unserved: sum(&|s| s.unserved) * dt,
            mean_clear_price: mean(sum(&|s| s.clear_price)),
        };
        Self {
            scenario,
            der_classes,
            unit_classes,
            interval_duration,
            j3_weight,
            res_worst_case,
            steps,
            cumulative_cost,
            summary,
        }
    }

    /// Column names of `steps.csv`, in order.
    pub fn step_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = [
            "k",
            "clear_price",
            "over_capacity",
            "demand_kw",
            "res_available_kw",
            "res_worst_case_kw",
            "res_planned_kw",
            "res_used_kw",
            "served_kw",
            "unserved_kw",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for u in &self.unit_classes {
            cols.push(format!("{}_kw", u.name));
            cols.push(format!("{}_committed", u.name));
            cols.push(format!("{}_started", u.name));
        }
        for c in ["j1", "j2", "penalty", "j3", "j", "cumulative_j"] {
            cols.push(c.into());
        }
        for i in 0..self.der_classes.len() {
            cols.push(format!("soc_mean_class{i}"));
        }
        for i in 0..self.der_classes.len() {
            cols.push(format!("price_mean_class{i}"));
        }
        cols
    }

    pub fn steps_csv(&self) -> String {
        let mut out = self.step_columns().join(",");
        out.push('\n');
        let mut running = 0i64;
        for (s, &res_worst) in self.steps.iter().zip(&self.res_worst_case) {
            running += micros(s.j);
            let mut row = vec![
                s.k.to_string(),
                f6(s.clear_price),
                u8::from(s.over_capacity).to_string(),
                f6(s.demand),
                f6(s.res_available),
                f6(res_worst),
                f6(s.res_planned),
                f6(s.res_used),
                f6(s.served),
                f6(s.unserved),
            ];
            for (d, &p) in s.dispatch.classes.iter().zip(&s.class_power) {
                row.push(f6(p));
                row.push(d.committed.to_string());
                row.push(d.started.to_string());
            }
            row.push(f6(s.j1));
            row.push(f6(s.j2));
            row.push(f6(s.penalty));
            row.push(f6(s.j3));
            row.push(fmt_micros(micros(s.j)));
            row.push(fmt_micros(running));
            row.extend(s.soc_mean.iter().map(|&v| f6(v)));
            row.extend(s.price_mean.iter().map(|&v| f6(v)));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            scenario: u8,
            der_classes: &'a [f64],
            unit_classes: Vec<&'a str>,
            j3_weight: f64,
            interval_duration: f64,
            #[serde(flatten)]
            summary: &'a Summary,
        }
        let doc = Doc {
            scenario: self.scenario.number(),
            der_classes: &self.der_classes,
            unit_classes: self.unit_classes.iter().map(|u| u.name.as_str()).collect(),
            j3_weight: self.j3_weight,
            interval_duration: self.interval_duration,
            summary: &self.summary,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Plot series as `(file name, x-y rows)`.
    pub fn plot_series(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        let xy = |f: &dyn Fn(&StepResult) -> f64| -> Vec<(f64, f64)> {
            self.steps.iter().map(|s| (s.k as f64, f(s))).collect()
        };
        let mut out = Vec::new();
        for i in 0..self.der_classes.len() {
            out.push((format!("soc_class{i}.csv"), xy(&|s| s.soc_mean[i])));
        }
        for i in 0..self.der_classes.len() {
            out.push((
                format!("customer_price_class{i}.csv"),
                xy(&|s| s.price_mean[i]),
            ));
        }
        out.push(("clear_price.csv".into(), xy(&|s| s.clear_price)));
        for (i, u) in self.unit_classes.iter().enumerate() {
            out.push((
                format!("dispatch_{}.csv", u.name),
                xy(&|s| s.class_power[i]),
            ));
        }
        out.push(("demand.csv".into(), xy(&|s| s.demand)));
        out.push(("res.csv".into(), xy(&|s| s.res_available)));
        out.push((
            "cumulative_cost.csv".into(),
            self.steps
                .iter()
                .zip(&self.cumulative_cost)
                .map(|(s, &c)| (s.k as f64, c))
                .collect(),
        ));
        out
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Write `steps.csv`, `summary.json` and `plots/*.csv` under `out_dir`.
pub fn emit_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    let plots = out_dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    write(&out_dir.join("steps.csv"), &report.steps_csv())?;
    write(&out_dir.join("summary.json"), &report.summary_json())?;
    for (name, rows) in report.plot_series() {
        let mut text = String::from("x,y\n");
        for (x, y) in rows {
            let _ = writeln!(text, "{},{}", f6(x), f6(y));
        }
        write(&plots.join(name), &text)?;
    }
    Ok(())
}

/// Side-by-side totals, one row per metric and one column per report.
pub fn comparison_csv(reports: &[RunReport]) -> String {
    let mut out = String::from("metric");
    for r in reports {
        let _ = write!(out, ",scenario{}", r.scenario.number());
    }
    out.push('\n');
    let mut row = |name: String, f: &dyn Fn(&Summary) -> f64| {
        out.push_str(&name);
        for r in reports {
            out.push(',');
            out.push_str(&f6(f(&r.summary)));
        }
        out.push('\n');
    };
    let n_der = reports.first().map_or(0, |r| r.der_classes.len());
    for i in 0..n_der {
        let a = reports[0].der_classes[i];
        row(format!("soc_mean_a{a}"), &|s| s.soc_mean[i]);
    }
    row("total_cost".into(), &|s| s.total_cost);
    row("supply_cost".into(), &|s| s.supply_cost);
    row("j1".into(), &|s| s.j1);
    row("j2".into(), &|s| s.j2);
    row("penalty".into(), &|s| s.penalty);
    row("j3".into(), &|s| s.j3);
    row("dg_energy_kwh".into(), &|s| s.dg_energy);
    row("bess_energy_kwh".into(), &|s| s.bess_energy);
    row("res_deterministic_kwh".into(), &|s| s.res_deterministic);
    row("res_worst_case_kwh".into(), &|s| s.res_worst_case);
    row("res_used_kwh".into(), &|s| s.res_used);
    row("demand_kwh".into(), &|s| s.demand);
    row("unserved_kwh".into(), &|s| s.unserved);
    row("mean_clear_price".into(), &|s| s.mean_clear_price);
    out
}

/// Emit every report under `scenario<N>/` plus `comparison.csv`.
pub fn emit_comparison(reports: &[RunReport], out_dir: &Path) -> Result<()> {
    for r in reports {
        emit_report(r, &out_dir.join(format!("scenario{}", r.scenario.number())))?;
    }
    write(&out_dir.join("comparison.csv"), &comparison_csv(reports))
}
