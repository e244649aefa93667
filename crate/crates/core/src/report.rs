//! CSV and JSON renderings of tower reports.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::session::SessionConfig;
use crate::towers::{ChainMethod, QuotientEntry, Stabilization, TowerReport};

#[derive(Serialize)]
struct CsvRow {
    n: u32,
    m: u32,
    kernel_order_exp: u64,
    kernel_p_rank: usize,
}

/// One row per grid cell: `n,m,kernel_order_exp,kernel_p_rank`.
pub fn tower_csv(report: &TowerReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in &report.grid {
        w.serialize(CsvRow { n: e.n, m: e.m, kernel_order_exp: e.order_exp, kernel_p_rank: e.p_rank })
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

#[derive(Serialize)]
struct JsonGrid {
    n: u32,
    m: u32,
    order_exp: u64,
    p_rank: usize,
    exponents: Vec<u32>,
    stable: bool,
}

#[derive(Serialize)]
struct JsonSummary {
    max_order_exp: u64,
    compatible_chains: Option<u128>,
}

#[derive(Serialize)]
struct JsonMeta<'a> {
    input_sha256: String,
    family: &'a str,
    level: u32,
    chain_method: ChainMethod,
    chains_log_p: u64,
    chains_linear_log_p: u64,
    chains_exhaustive: Option<u128>,
    transitions_coherent: bool,
    stable: bool,
    compatibility_checks: usize,
    stabilization: &'a [Stabilization],
    quotients: &'a [QuotientEntry],
    caveats: Vec<String>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a SessionConfig,
    input: &'a BTreeMap<String, String>,
    grid: Vec<JsonGrid>,
    summary: JsonSummary,
    meta: JsonMeta<'a>,
}

/// SHA-256 of the configuration and the input echo.
pub fn input_hash(cfg: &SessionConfig, input: &BTreeMap<String, String>) -> String {
    let text = serde_json::to_string(&(cfg, input)).expect("serializable");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn tower_json(cfg: &SessionConfig, input: &BTreeMap<String, String>, report: &TowerReport) -> Result<String> {
    let mut caveats = vec![format!(
        "finite window n <= {}, m <= {} at level {} and precision p^{}; a profile, not a pseudo-nullity proof",
        report.n_max, report.m_max, report.level, report.prec
    )];
    if !report.stable {
        caveats.push("some kernels changed between the two working precisions".into());
    }
    if !report.chains.coherent {
        caveats.push("a kernel generator did not project into the kernel one step below".into());
    }
    let doc = JsonReport {
        config: cfg,
        input,
        grid: report
            .grid
            .iter()
            .map(|e| JsonGrid {
                n: e.n,
                m: e.m,
                order_exp: e.order_exp,
                p_rank: e.p_rank,
                exponents: e.exponents.clone(),
                stable: e.stable,
            })
            .collect(),
        summary: JsonSummary { max_order_exp: report.max_order_exp(), compatible_chains: report.chains.count },
        meta: JsonMeta {
            input_sha256: input_hash(cfg, input),
            family: &report.family,
            level: report.level,
            chain_method: report.chains.method,
            chains_log_p: report.chains.log_p,
            chains_linear_log_p: report.chains.linear_log_p,
            chains_exhaustive: report.chains.exhaustive,
            transitions_coherent: report.chains.coherent,
            stable: report.stable,
            compatibility_checks: report.compatibility_checks,
            stabilization: &report.stabilization,
            quotients: &report.quotients,
            caveats,
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// The one-line summary printed after a tower run.
pub fn summary_line(report: &TowerReport) -> String {
    let chains = match report.chains.count {
        Some(c) => c.to_string(),
        None => format!("p^{}", report.chains.log_p),
    };
    format!(
        "max_kernel_order=p^{} compatible_chains={} method={} stable={}",
        report.max_order_exp(),
        chains,
        match report.chains.method {
            ChainMethod::Exhaustive => "exhaustive",
            ChainMethod::Linear => "linear",
        },
        report.stable
    )
}
