//! Machine-readable verification reports.
//!
//! Floats are serialized with 17 significant digits so that reports
//! round-trip exactly and diff cleanly; non-finite diagnostics serialize
//! as `null`. The schema is versioned and `check_report_document`
//! validates a parsed report against it.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::catalog::{self, CatalogId, Params};
use crate::flow;
use crate::goverify::{self, GoCertificate, Verdict};
use crate::homspace::{
    metric_operator, HomogeneousSpace, MetricOperator, MetricSpec, SpaceFlags, StructuralReport,
    Submodule,
};
use crate::poisson::{self, FamilyRecipe};
use crate::structure::{self, ComplexityReport};
use crate::{Error, Result, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct StructuralSection {
    pub dims: crate::homspace::Dims,
    pub flags: SpaceFlags,
    pub checks: StructuralReport,
    pub metric_ad_invariance_residual: f64,
    pub natural_reductivity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoSection {
    pub lemma: GoCertificate,
    pub centrality: GoCertificate,
    pub gordon: Option<GoCertificate>,
    /// All computed criteria returned the same verdict.
    pub agree: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberCentrality {
    pub label: String,
    pub central: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySection {
    pub recipe: String,
    pub members: Vec<String>,
    pub commutativity: poisson::CommutativityReport,
    pub completeness: Option<poisson::CompletenessReport>,
    pub completeness_note: Option<String>,
    pub centrality: Vec<MemberCentrality>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSection {
    pub n_directions: usize,
    pub t_max: f64,
    pub n_steps: usize,
    pub max_unit_norm_drift: f64,
    pub planarity: Vec<f64>,
    pub closure_dims: Vec<usize>,
    pub ambiguous_ratio: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub schema_version: u32,
    pub catalog_id: String,
    pub label: String,
    pub params: Params,
    pub metric: String,
    pub thresholds: Tolerances,
    pub seed: u64,
    pub n_samples: usize,
    pub structural: StructuralSection,
    pub go: GoSection,
    pub complexity: ComplexityReport,
    pub poisson: Vec<FamilySection>,
    pub flow: Option<FlowSection>,
    /// Any indeterminate verdict or flagged section.
    pub indeterminate: bool,
    /// The criteria agree and every section is internally consistent.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub with_flow: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            n_samples: 8,
            seed: 1729,
            tol: Tolerances::default(),
            with_flow: true,
        }
    }
}

fn go_section(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    opts: &AnalyzeOptions,
) -> Result<GoSection> {
    let lemma = goverify::go_check(space, metric, opts.n_samples, opts.seed, &opts.tol)?;
    let centrality =
        goverify::go_check_centrality(space, metric, opts.n_samples, opts.seed, &opts.tol)?;
    let gordon = match &metric.spec {
        MetricSpec::Normal if space.l.dim() > 0 => Some(goverify::go_check_gordon(
            space,
            1.0,
            opts.n_samples,
            opts.seed,
            &opts.tol,
        )?),
        MetricSpec::Lambda(l) if space.l.dim() > 0 => Some(goverify::go_check_gordon(
            space,
            *l,
            opts.n_samples,
            opts.seed,
            &opts.tol,
        )?),
        _ => None,
    };
    let mut agree = lemma.verdict == centrality.verdict;
    if let Some(g) = &gordon {
        agree &= g.verdict == lemma.verdict;
    }
    Ok(GoSection {
        verdict: lemma.verdict,
        agree,
        lemma,
        centrality,
        gordon,
    })
}

fn family_section(
    space: &crate::homspace::SpaceRef,
    recipe: &FamilyRecipe,
    opts: &AnalyzeOptions,
    with_centrality: bool,
) -> Result<FamilySection> {
    let family = poisson::build_family(space, recipe)?;
    let commutativity = poisson::commutativity_residual(&family, opts.n_samples, opts.seed);
    let (completeness, note) =
        match poisson::completeness_check(&family, opts.n_samples, opts.seed, &opts.tol) {
            Ok(rep) => (Some(rep), None),
            Err(Error::NonCommutingFamily { f, g, residual }) => (
                None,
                Some(format!(
                    "family does not commute (|{{{f}, {g}}}| = {residual:.3e}); completeness not defined"
                )),
            ),
            Err(e) => return Err(e),
        };
    let centrality = if with_centrality {
        family
            .members
            .iter()
            .map(|f| {
                let out = poisson::centrality_test(f, opts.n_samples, opts.seed, &opts.tol);
                MemberCentrality {
                    label: f.label.clone(),
                    central: out.central,
                    max_residual: out.max_residual,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(FamilySection {
        recipe: family.recipe.clone(),
        members: family.members.iter().map(|m| m.label.clone()).collect(),
        commutativity,
        completeness,
        completeness_note: note,
        centrality,
    })
}

/// Full verification report for one catalog entry and metric.
pub fn analyze(
    id: CatalogId,
    params: &Params,
    spec: &MetricSpec,
    opts: &AnalyzeOptions,
) -> Result<Report> {
    let space = std::sync::Arc::new(catalog::build_space_with(id, params, &opts.tol)?);
    let checks = space.validate(&opts.tol)?;
    let metric = metric_operator(&space, spec)?;
    let nr = goverify::natural_reductivity_residual(&space, &metric);
    let go = go_section(&space, &metric, opts)?;
    let complexity = structure::generic_dims(&space, opts.n_samples.max(4), opts.seed, &opts.tol)?;

    let mut families = Vec::new();
    let k_max = space.g.rank().clamp(1, 4);
    families.push(family_section(
        &space,
        &FamilyRecipe::Traces {
            k_max,
            domain: Submodule::M,
        },
        opts,
        true,
    )?);
    if space.l.dim() > 0 {
        let a_diag: Vec<f64> = (1..=space.l.dim()).map(|i| i as f64).collect();
        families.push(family_section(
            &space,
            &FamilyRecipe::DeformationWithQuad { a_diag },
            opts,
            true,
        )?);
        families.push(family_section(&space, &FamilyRecipe::LinearOnL, opts, false)?);
        families.push(family_section(
            &space,
            &FamilyRecipe::TracesOnMPlusLinear { k_max },
            opts,
            false,
        )?);
    }

    let flow_section = if opts.with_flow && space.base_point.is_some() && go.verdict == Verdict::Go
    {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(opts.seed);
        let n_directions = 2;
        let t_max = 200.0;
        let n_steps = 512;
        let mut drift = 0.0_f64;
        let mut planarity = Vec::new();
        let mut closure_dims = Vec::new();
        let mut ambiguous = false;
        for _ in 0..n_directions {
            let x = space.random_unit_in(Submodule::V, &mut rng);
            let traj = flow::orbit_trajectory(&space, &metric, &x, t_max, n_steps, &opts.tol)?;
            drift = drift.max(traj.max_unit_norm_drift());
            planarity.push(flow::planarity_residual(&traj)?);
            let est = flow::closure_dim_estimate(&space, &traj.generator)?;
            ambiguous |= est.ambiguous_ratio.is_some();
            closure_dims.push(est.dim);
        }
        Some(FlowSection {
            n_directions,
            t_max,
            n_steps,
            max_unit_norm_drift: drift,
            planarity,
            closure_dims,
            ambiguous_ratio: ambiguous,
        })
    } else {
        None
    };

    let any_indeterminate = go.verdict == Verdict::Indeterminate
        || go.centrality.verdict == Verdict::Indeterminate
        || go
            .gordon
            .as_ref()
            .is_some_and(|g| g.verdict == Verdict::Indeterminate)
        || flow_section.as_ref().is_some_and(|f| f.ambiguous_ratio);
    let consistent = go.agree && complexity.consistent;

    Ok(Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        catalog_id: space.catalog_id.clone(),
        label: space.label.clone(),
        params: *params,
        metric: metric.spec.describe(),
        thresholds: opts.tol,
        seed: opts.seed,
        n_samples: opts.n_samples,
        structural: StructuralSection {
            dims: space.dims(),
            flags: space.flags,
            checks,
            metric_ad_invariance_residual: metric.ad_invariance_residual,
            natural_reductivity_residual: nr,
        },
        go,
        complexity,
        poisson: families,
        flow: flow_section,
        indeterminate: any_indeterminate,
        consistent,
    })
}

/// CI exit-code contract: 0 all consistent, 2 indeterminate present,
/// 1 structural failure, 64 usage error (applied by the binary).
pub fn exit_code(report: &Report) -> i32 {
    if !report.consistent {
        1
    } else if report.indeterminate {
        2
    } else {
        0
    }
}

pub const TABLE1_LAMBDAS: [f64; 4] = [0.3, 0.5, 2.0, 5.0];

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub row: String,
    pub label: String,
    pub params: Params,
    pub verdicts: Vec<(f64, Verdict)>,
    pub max_residual: f64,
    pub lambda_independent: bool,
    pub criteria_agree: bool,
    pub ddim: usize,
    pub dind: usize,
    pub complexity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub tool_version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub thresholds: Tolerances,
    pub rows: Vec<Table1Row>,
}

/// Run the supported classification rows at minimal parameters over the
/// standard lambda sweep.
pub fn table1(seed: u64, tol: &Tolerances) -> Result<Table1Report> {
    let mut rows = Vec::new();
    for (id, params) in catalog::supported_rows() {
        let space = std::sync::Arc::new(catalog::build_space_with(id, &params, tol)?);
        let mut verdicts = Vec::new();
        let mut max_residual = 0.0_f64;
        let mut agree = true;
        for lambda in TABLE1_LAMBDAS {
            let metric = metric_operator(&space, &MetricSpec::Lambda(lambda))?;
            let lemma = goverify::go_check(&space, &metric, 8, seed, tol)?;
            let cent = goverify::go_check_centrality(&space, &metric, 8, seed, tol)?;
            let gordon = goverify::go_check_gordon(&space, lambda, 8, seed, tol)?;
            agree &= lemma.verdict == cent.verdict && cent.verdict == gordon.verdict;
            max_residual = max_residual
                .max(lemma.max_residual)
                .max(cent.max_residual)
                .max(gordon.max_residual);
            verdicts.push((lambda, lemma.verdict));
        }
        let lambda_independent = verdicts.windows(2).all(|w| w[0].1 == w[1].1);
        let counts = structure::generic_dims(&space, 8, seed, tol)?;
        rows.push(Table1Row {
            row: space.catalog_id.clone(),
            label: space.label.clone(),
            params,
            verdicts,
            max_residual,
            lambda_independent,
            criteria_agree: agree,
            ddim: counts.ddim,
            dind: counts.dind,
            complexity: counts.complexity,
        });
    }
    Ok(Table1Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        seed,
        thresholds: *tol,
        rows,
    })
}

impl Table1Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let lambda_cols: Vec<String> = TABLE1_LAMBDAS
            .iter()
            .map(|l| format!("verdict_lambda_{l}"))
            .collect();
        out.push_str(&format!(
            "row,label,n,r,{},lambda_independent,criteria_agree,ddim,dind,complexity\n",
            lambda_cols.join(",")
        ));
        for r in &self.rows {
            let verdicts: Vec<String> = r
                .verdicts
                .iter()
                .map(|(_, v)| format!("{v:?}").to_uppercase())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.row,
                r.label.replace(',', ";"),
                r.params.n,
                r.params.r,
                verdicts.join(","),
                r.lambda_independent,
                r.criteria_agree,
                r.ddim,
                r.dind,
                r.complexity
            ));
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        let any_indet = self
            .rows
            .iter()
            .any(|r| r.verdicts.iter().any(|(_, v)| *v == Verdict::Indeterminate));
        let any_disagree = self.rows.iter().any(|r| !r.criteria_agree);
        if any_disagree {
            1
        } else if any_indet {
            2
        } else {
            0
        }
    }
}

// -------------------------------------------------------------------
// serialization with 17 significant digits
// -------------------------------------------------------------------

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            write!(writer, "null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize any report document with the 17-significant-digit float
/// convention.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    String::from_utf8(buf).expect("json is utf-8")
}

/// Structural check of a parsed analyze-report document against the
/// published schema (version 1).
pub fn check_report_document(doc: &serde_json::Value) -> std::result::Result<(), String> {
    let obj = doc.as_object().ok_or("report must be an object")?;
    for key in [
        "tool_version",
        "schema_version",
        "catalog_id",
        "params",
        "metric",
        "thresholds",
        "seed",
        "structural",
        "go",
        "complexity",
        "poisson",
        "indeterminate",
        "consistent",
    ] {
        if !obj.contains_key(key) {
            return Err(format!("missing key `{key}`"));
        }
    }
    if obj["schema_version"].as_u64() != Some(SCHEMA_VERSION as u64) {
        return Err("schema_version mismatch".to_string());
    }
    let go = obj["go"].as_object().ok_or("go must be an object")?;
    for key in ["lemma", "centrality", "agree", "verdict"] {
        if !go.contains_key(key) {
            return Err(format!("missing go key `{key}`"));
        }
    }
    let cert = go["lemma"].as_object().ok_or("lemma certificate")?;
    for key in ["samples", "verdict", "accept_tol", "reject_tol", "seed"] {
        if !cert.contains_key(key) {
            return Err(format!("missing certificate key `{key}`"));
        }
    }
    let cx = obj["complexity"].as_object().ok_or("complexity section")?;
    for key in ["ddim", "dind", "complexity", "generic", "rank_gap", "consistent"] {
        if !cx.contains_key(key) {
            return Err(format!("missing complexity key `{key}`"));
        }
    }
    Ok(())
}

/// Parse `diag:1,2,3` or `diag:1,2,3:0.5` into a fiber metric block.
pub fn parse_fiber_spec(text: &str) -> Result<MetricSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.is_empty() || parts[0] != "diag" || parts.len() > 3 {
        return Err(Error::InvalidInput(format!(
            "fiber spec must look like diag:1,2,3[:lambda_m], got `{text}`"
        )));
    }
    let entries: std::result::Result<Vec<f64>, _> =
        parts[1].split(',').map(str::parse::<f64>).collect();
    let entries =
        entries.map_err(|e| Error::InvalidInput(format!("bad fiber diagonal: {e}")))?;
    let lambda_m = if parts.len() == 3 {
        parts[2]
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("bad lambda_m: {e}")))?
    } else {
        1.0
    };
    let mut a_l = DMatrix::<f64>::zeros(entries.len(), entries.len());
    for (i, v) in entries.iter().enumerate() {
        a_l[(i, i)] = *v;
    }
    Ok(MetricSpec::Fiber { a_l, lambda_m })
}
