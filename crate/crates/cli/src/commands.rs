use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polarlab::channel::{ChannelFile, Classifier};
use polarlab::lab::verify::{run_suite, Suite};
use polarlab::lab::{
    open_problem_trend, polarize_erasure, polarize_tree_multi, PolarizationReport, TreeOptions, DEFAULT_DELTAS,
};
use polarlab::symmetry::quick_symmetry_check;
use polarlab::transform::{apply_sequence, DEFAULT_MAX_ALPHABET};
use polarlab::zoo::{self, GeneralizedSymmetricSpec};
use polarlab::{Channel, GroupSpec, SignSequence, TransformOptions};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Family};
use crate::error::CliError;
use crate::{FamilyArgs, Method, PolarizeArgs, TransformArgs, TrendArgs, VerifyArgs};

pub const MAX_ALPHABET_ENV: &str = "POLARLAB_MAX_ALPHABET";

pub struct Context {
    cfg: ExperimentConfig,
    max_alphabet: usize,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialisation cannot fail");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_channel(path: &Path) -> Result<Channel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ChannelFile =
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), source: e })?;
    Ok(file.into_channel()?)
}

fn check_deltas(deltas: &[f64]) -> Result<(), CliError> {
    if deltas.is_empty() {
        return Err(usage("at least one delta is required"));
    }
    match deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        Some(d) => Err(usage(format!("delta must be positive, got {d}"))),
        None => Ok(()),
    }
}

/// `out.csv` with delta 0.05 becomes `out.delta0.05.csv`.
fn per_delta_path(path: &Path, delta: f64) -> PathBuf {
    let stem = path.file_stem().map(OsString::from).unwrap_or_default();
    let mut name = stem;
    name.push(format!(".delta{delta}"));
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

fn summary(r: &PolarizationReport) -> String {
    let classes: Vec<String> = r
        .classes_present()
        .iter()
        .map(|s| format!("H{}(|H|={}):{:.4}", s.id, s.order, s.fraction))
        .collect();
    format!(
        "delta={} n={} classified={:.4} unclassified={:.4} ambiguous={} [{}]{}",
        r.delta,
        r.depth,
        r.classified_fraction(),
        r.unclassified_fraction,
        r.ambiguous,
        classes.join(" "),
        if r.approximate { " [approximate]" } else { "" }
    )
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, CliError> {
        let max_alphabet = match std::env::var(MAX_ALPHABET_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| usage(format!("{MAX_ALPHABET_ENV}={v:?} is not a positive integer")))?,
            Err(_) => cfg.max_alphabet.unwrap_or(DEFAULT_MAX_ALPHABET),
        };
        Ok(Context { cfg, max_alphabet })
    }

    fn orders(&self, flag: Option<Vec<usize>>) -> Result<Arc<GroupSpec>, CliError> {
        let orders = flag.or_else(|| self.cfg.orders.clone()).ok_or_else(|| usage("--orders is required"))?;
        Ok(Arc::new(GroupSpec::new(&orders)?))
    }

    fn transform_options(&self, quantize: Option<usize>) -> TransformOptions {
        TransformOptions {
            max_alphabet: self.max_alphabet,
            quantize: quantize.or(self.cfg.quantize),
            ..TransformOptions::default()
        }
    }

    fn build(&self, a: FamilyArgs) -> Result<Channel, CliError> {
        let c = &self.cfg;
        let family = a.family.or(c.family).ok_or_else(|| usage("--family is required"))?;
        let group = self.orders(a.orders)?;
        let eps = || a.eps.or(c.eps).ok_or_else(|| usage("--eps is required for this family"));
        let w = match family {
            Family::Qec => zoo::qec(group, eps()?)?,
            Family::Qsc => zoo::qsc(group, eps()?)?,
            Family::Gensym => {
                let text = a
                    .components
                    .or_else(|| c.components.clone())
                    .ok_or_else(|| usage("--components is required for gensym"))?;
                zoo::generalized_qsym(group, &GeneralizedSymmetricSpec::parse(&text)?)?
            }
            Family::Homo => {
                let members = a
                    .subgroup
                    .or_else(|| c.subgroup.clone())
                    .ok_or_else(|| usage("--subgroup is required for homo"))?;
                let h = group.subgroup_from_members(&members)?;
                zoo::deterministic_homomorphism(group, &h)?
            }
            Family::Random => {
                let m = a.m.or(c.m).ok_or_else(|| usage("--m is required for random"))?;
                zoo::random_channel(group, m, a.seed.or(c.seed).unwrap_or(0))?
            }
        };
        Ok(w)
    }

    pub fn group_info(&self, orders: Option<Vec<usize>>) -> Result<(), CliError> {
        let g = self.orders(orders)?;
        let characteristic = g.characteristic_subgroups();
        let subgroups: Vec<_> = g
            .enumerate_subgroups()
            .into_iter()
            .enumerate()
            .map(|(id, h)| {
                json!({
                    "id": id,
                    "order": h.order(),
                    "members": h.members(),
                    "elements": h.members().iter().map(|&x| g.format_element(x)).collect::<Vec<_>>(),
                    "characteristic": characteristic.contains(&h),
                })
            })
            .collect();
        let info = json!({
            "orders": g.orders(),
            "name": g.to_string(),
            "order": g.order(),
            "cyclic": g.is_cyclic(),
            "automorphisms": g.automorphism_count(),
            "subgroups": subgroups,
        });
        emit(&to_json(&info), None)
    }

    pub fn channel_build(&self, a: FamilyArgs, out: Option<PathBuf>) -> Result<(), CliError> {
        let w = self.build(a)?;
        let mut text = w.to_json();
        text.push('\n');
        emit(&text, out.or_else(|| self.cfg.out.clone()).as_deref())
    }

    pub fn channel_info(&self, file: &Path, deltas: Option<Vec<f64>>) -> Result<(), CliError> {
        let w = load_channel(file)?;
        let deltas = deltas.or_else(|| self.cfg.deltas.clone()).unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
        check_deltas(&deltas)?;
        let classifier = Classifier::new(w.group_arc().clone());
        let quotients = classifier.quotient_capacities(&w);
        let capacity = w.symmetric_capacity();
        let subgroups: Vec<_> = classifier
            .subgroups()
            .iter()
            .zip(classifier.levels())
            .zip(&quotients)
            .enumerate()
            .map(|(id, ((h, level), qc))| {
                json!({ "id": id, "members": h.members(), "level_bits": level, "quotient_capacity_bits": qc })
            })
            .collect();
        let classes: Vec<_> = deltas
            .iter()
            .map(|&d| {
                let c = classifier.classify_capacities(capacity, &quotients, d);
                json!({
                    "delta": d,
                    "class": c.subgroup(),
                    "nearest": c.nearest,
                    "gap_capacity": c.gap_capacity,
                    "gap_quotient": c.gap_quotient,
                    "qualifying": c.qualifying,
                })
            })
            .collect();
        let info = json!({
            "label": w.label(),
            "orders": w.group().orders(),
            "num_inputs": w.num_inputs(),
            "num_outputs": w.num_outputs(),
            "reduced_outputs": w.reduce().num_outputs(),
            "capacity_bits": capacity,
            "erasure_equivalent": w.erasure_equivalent(),
            "automorphic_symmetric": quick_symmetry_check(&w),
            "subgroups": subgroups,
            "classifications": classes,
        });
        emit(&to_json(&info), None)
    }

    pub fn transform(&self, a: TransformArgs) -> Result<(), CliError> {
        let w = load_channel(&a.file)?;
        let seq: SignSequence = a.seq.parse()?;
        let opts = self.transform_options(a.quantize);
        let out = apply_sequence(&w, &seq, &opts)?;
        eprintln!(
            "{}: I={} bits, {} outputs{}",
            out.label(),
            out.symmetric_capacity(),
            out.num_outputs(),
            if opts.is_approximate() { " [approximate]" } else { "" }
        );
        let mut text = out.to_json();
        text.push('\n');
        emit(&text, a.out.or_else(|| self.cfg.out.clone()).as_deref())
    }

    pub fn polarize(&self, a: PolarizeArgs) -> Result<(), CliError> {
        let c = &self.cfg;
        let deltas = a.delta.or_else(|| c.deltas.clone()).unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
        check_deltas(&deltas)?;
        let file = a.file.or_else(|| if a.source.family.is_none() { c.channel.clone() } else { None });
        let w = match file {
            Some(p) => load_channel(&p)?,
            None => self.build(a.source)?,
        };
        let opts = self.transform_options(a.quantize);
        let full = a.full || c.full.unwrap_or(false);
        let erasure = match a.method {
            Method::Matrix => None,
            Method::Erasure => Some(
                w.erasure_equivalent()
                    .ok_or_else(|| usage("--method erasure needs an erasure channel input"))?,
            ),
            Method::Auto if opts.is_approximate() => None,
            Method::Auto => w.erasure_equivalent(),
        };
        let depth = a.depth.or(c.depth).unwrap_or(if erasure.is_some() { 20 } else { 8 });

        let reports: Vec<PolarizationReport> = match erasure {
            Some(eps) => deltas
                .iter()
                .map(|&d| {
                    polarize_erasure(w.group_arc().clone(), eps, depth, d, full).map(|mut r| {
                        r.channel = w.label().to_string();
                        r
                    })
                })
                .collect::<Result<_, _>>()?,
            None => {
                let tree = TreeOptions { transform: opts, full, ..TreeOptions::default() };
                polarize_tree_multi(&w, depth, &deltas, &tree)?
            }
        };
        for r in &reports {
            eprintln!("{}", summary(r));
        }
        if let Some(csv) = a.csv.or_else(|| c.csv.clone()) {
            if reports.len() == 1 {
                write_file(&csv, &reports[0].to_csv())?;
            } else {
                for r in &reports {
                    write_file(&per_delta_path(&csv, r.delta), &r.to_csv())?;
                }
            }
        }
        let text = if reports.len() == 1 { to_json(&reports[0]) } else { to_json(&reports) };
        emit(&text, a.out.or_else(|| c.out.clone()).as_deref())
    }

    pub fn trend(&self, a: TrendArgs) -> Result<(), CliError> {
        let c = &self.cfg;
        let group = self.orders(a.orders)?;
        let eps = a.eps.or(c.eps).ok_or_else(|| usage("--eps is required"))?;
        let delta = a.delta.or_else(|| c.deltas.as_ref().and_then(|d| d.first().copied())).unwrap_or(0.1);
        check_deltas(&[delta])?;
        let depth = a.depth.or(c.depth).unwrap_or(10);
        let table = open_problem_trend(group, eps, depth, delta, &self.transform_options(a.quantize))?;
        for r in &table.rows {
            eprintln!(
                "n={} perfect={:.4} useless={:.4} intermediate={:.4} unclassified={:.4}",
                r.depth, r.perfect, r.useless, r.intermediate, r.unclassified
            );
        }
        if let Some(reason) = &table.stopped {
            eprintln!("{reason}");
        }
        if let Some(csv) = a.csv.or_else(|| c.csv.clone()) {
            write_file(&csv, &table.to_csv())?;
        }
        emit(&to_json(&table), a.out.or_else(|| c.out.clone()).as_deref())
    }

    pub fn verify(&self, a: VerifyArgs) -> Result<(), CliError> {
        let c = &self.cfg;
        let suite: Suite = a.suite.or_else(|| c.suite.clone()).as_deref().unwrap_or("all").parse()?;
        let group = self.orders(a.orders)?;
        let seed = a.seed.or(c.seed).unwrap_or(1);
        let trials = a.trials.or(c.trials).unwrap_or(10_000);
        if trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        let outcomes = run_suite(suite, group.clone(), trials, seed)?;
        let passed = outcomes.iter().all(|o| o.passed);
        for o in &outcomes {
            eprintln!(
                "{} {}: {} cases, worst margin {}",
                if o.passed { "PASS" } else { "FAIL" },
                o.name,
                o.cases_checked,
                o.worst_margin.map_or_else(|| "n/a".to_string(), |m| format!("{m:.6e}"))
            );
        }
        let doc = json!({
            "orders": group.orders(),
            "suite": suite.to_string(),
            "seed": seed,
            "trials": trials,
            "passed": passed,
            "outcomes": outcomes,
        });
        emit(&to_json(&doc), a.out.or_else(|| c.out.clone()).as_deref())?;
        if passed {
            Ok(())
        } else {
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
            Err(CliError::VerificationFailed(failed.join(", ")))
        }
    }
}
