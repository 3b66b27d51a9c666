use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mlms::formula::{self as fm, Formula};
use mlms::harness::{self, GenConfig};
use mlms::hilbert::{self, check_proof, LemmaStore};
use mlms::parse::{model_to_file, parse_formula, parse_model, parse_proof, print_formula, print_model, print_proof};
use mlms::semantics::{bounded_search, mc, Assignment, FrameClass, KripkeModel, SearchResult};
use mlms::tableau::{self, Options};
use mlms::translate::{self, EmbedMode, Sort, TranslateOptions};
use mlms::{bisim, par};

#[derive(Parser)]
#[command(name = "mlms", version, about = "Modal logic of mention-some: parse, decide, check, translate")]
struct Cli {
    /// Print machine-readable JSON records instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Foml,
    #[value(name = "2sfol")]
    TwoSorted,
    Fol1,
    Tptp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    DiaBox,
    Dia,
}

#[derive(Clone, Copy, ValueEnum)]
enum Frames {
    Arbitrary,
    S5,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and report its measures.
    Parse { formula: String },
    /// Pretty-print a model file (.json) or a proof script.
    Print { file: PathBuf },
    /// Positive normal form of the clean relettering.
    Pnf { formula: String },
    /// Rename bound variables apart.
    Reletter { formula: String },
    /// Decide satisfiability over increasing-domain models.
    Sat {
        formula: String,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long)]
        tableau_out: Option<PathBuf>,
        /// Keep every (∨) alternative; implied by --tableau-out.
        #[arg(long)]
        full_tableau: bool,
    },
    /// Evaluate a formula at a world.
    Mc {
        model: PathBuf,
        world: String,
        formula: String,
        /// Variable assignment, `x=a`; repeatable.
        #[arg(long = "assign", value_name = "VAR=OBJ")]
        assign: Vec<String>,
    },
    /// Decide ∃□-bisimilarity of two pointed models.
    Bisim {
        left: PathBuf,
        left_world: String,
        right: PathBuf,
        right_world: String,
        /// Comma-separated object sequence at the left point.
        #[arg(long, default_value = "")]
        left_seq: String,
        #[arg(long, default_value = "")]
        right_seq: String,
        /// Print the relation, or a distinguishing formula.
        #[arg(long)]
        witness: bool,
    },
    /// Translate into first-order logic.
    Translate {
        formula: String,
        #[arg(long, value_enum, default_value = "2sfol")]
        target: Target,
        /// Guard `K[x]` successors with `E(v,x)`.
        #[arg(long)]
        evx: bool,
    },
    /// Embed a prenex first-order sentence.
    Embed {
        #[arg(long)]
        prenex: PathBuf,
        #[arg(long, value_enum, default_value = "dia-box")]
        mode: Mode,
    },
    /// Check a proof script.
    CheckProof {
        file: PathBuf,
        /// Extra lemma scripts (*.prf) on top of the bundled library.
        #[arg(long)]
        lemmas: Option<PathBuf>,
    },
    /// Look for a small model by enumeration.
    SearchModel {
        formula: String,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        #[arg(long, default_value_t = 3)]
        max_objects: usize,
        #[arg(long, value_enum, default_value = "arbitrary")]
        frames: Frames,
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Run a randomized cross-check suite.
    TestSuite {
        name: String,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write each failing case here as JSON.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Rerun one dumped case instead.
        #[arg(long, conflicts_with = "dump")]
        replay: Option<PathBuf>,
    },
}

/// 0 positive, 1 negative.
type Status = u8;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    par::set_sequential(cli.sequential);
    let mut out = Out { json: cli.json };
    match run(cli.cmd, &mut out) {
        Ok(s) => ExitCode::from(s),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, text: impl AsRef<str>, record: serde_json::Value) {
        // a closed pipe is not an error worth reporting
        let mut stdout = std::io::stdout().lock();
        let _ = if self.json {
            writeln!(stdout, "{record}")
        } else {
            writeln!(stdout, "{}", text.as_ref())
        };
    }
}

fn formula(s: &str) -> Result<Formula> {
    parse_formula(s).map_err(|e| anyhow!("{e}"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn model(path: &Path) -> Result<KripkeModel> {
    parse_model(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_model(path: &Path, m: &KripkeModel) -> Result<()> {
    let text = serde_json::to_string_pretty(&model_to_file(m))?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn objects(m: &KripkeModel, list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|o| m.object_index(o).map_err(|e| anyhow!("{e}")))
        .collect()
}

fn assignment_names(m: &KripkeModel, a: &Assignment) -> BTreeMap<String, String> {
    a.map.iter().map(|(k, &o)| (k.clone(), m.objects[o].clone())).collect()
}

fn run(cmd: Cmd, out: &mut Out) -> Result<Status> {
    match cmd {
        Cmd::Parse { formula: s } => {
            let f = formula(&s)?;
            let free: Vec<_> = fm::free_vars(&f).into_iter().collect();
            let text = print_formula(&f);
            out.emit(
                format!(
                    "{text}\nsize {}  length {}  modal depth {}  free {{{}}}  clean {}",
                    fm::formula_size(&f),
                    fm::formula_length(&f),
                    f.modal_depth(),
                    free.join(", "),
                    fm::is_clean(&f)
                ),
                json!({
                    "formula": text,
                    "size": fm::formula_size(&f),
                    "length": fm::formula_length(&f),
                    "modal_depth": f.modal_depth(),
                    "free": free,
                    "clean": fm::is_clean(&f),
                    "pnf": fm::is_pnf(&f),
                }),
            );
            Ok(0)
        }
        Cmd::Print { file } => {
            let text = read(&file)?;
            if file.extension().is_some_and(|e| e == "json") {
                let m = parse_model(&text).map_err(|e| anyhow!("{}: {e}", file.display()))?;
                out.emit(print_model(&m), serde_json::to_value(model_to_file(&m))?);
            } else {
                let s = parse_proof(&text).map_err(|e| anyhow!("{}: {e}", file.display()))?;
                let lines: Vec<_> = s.lines.iter().map(|l| print_formula(&l.formula)).collect();
                out.emit(print_proof(&s), json!({ "name": s.name, "lines": lines }));
            }
            Ok(0)
        }
        Cmd::Pnf { formula: s } => {
            let f = fm::reletter_clean(&formula(&s)?);
            let p = fm::to_pnf(&f).map_err(|e| anyhow!("{e}"))?;
            let text = print_formula(&p);
            out.emit(&text, json!({ "pnf": text }));
            Ok(0)
        }
        Cmd::Reletter { formula: s } => {
            let text = print_formula(&fm::reletter_clean(&formula(&s)?));
            out.emit(&text, json!({ "clean": text }));
            Ok(0)
        }
        Cmd::Sat {
            formula: s,
            model_out,
            tableau_out,
            full_tableau,
        } => {
            let f = formula(&s)?;
            // a printed tableau shows the unselected (∨) alternatives too
            let opts = Options {
                keep: true,
                full: full_tableau || tableau_out.is_some(),
                parallel_or: par::is_parallel(),
            };
            let r = tableau::run(&f, opts).map_err(|e| anyhow!("{e}"))?;
            if let (Some(path), Some(t)) = (&tableau_out, &r.tableau) {
                std::fs::write(path, tableau::print_tableau(t)).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut record = json!({
                "sat": r.sat,
                "max_live": r.stats.max_live,
                "nodes": r.stats.nodes,
                "size": fm::formula_size(&f),
            });
            if r.sat {
                let t = r.tableau.as_ref().ok_or_else(|| anyhow!("open tableau was not kept"))?;
                let ex = tableau::extract_model(t).map_err(|e| anyhow!("{e}"))?;
                if let Some(path) = &model_out {
                    write_model(path, &ex.model)?;
                }
                record["world"] = json!(ex.model.worlds[ex.root]);
                record["assignment"] = json!(assignment_names(&ex.model, &ex.assignment));
                record["model"] = serde_json::to_value(model_to_file(&ex.model))?;
            } else if model_out.is_some() {
                eprintln!("no model: the formula is unsatisfiable");
            }
            out.emit(if r.sat { "SAT" } else { "UNSAT" }, record);
            Ok(if r.sat { 0 } else { 1 })
        }
        Cmd::Mc {
            model: path,
            world,
            formula: s,
            assign,
        } => {
            let m = model(&path)?;
            let w = m.world_index(&world).map_err(|e| anyhow!("{e}"))?;
            let f = formula(&s)?;
            let pairs: Vec<(&str, &str)> = assign
                .iter()
                .map(|p| p.split_once('=').ok_or_else(|| anyhow!("expected VAR=OBJ, got '{p}'")))
                .collect::<Result<_>>()?;
            let a = Assignment::from_names(&m, &pairs).map_err(|e| anyhow!("{e}"))?;
            let v = mc(&m, w, &a, &f).map_err(|e| anyhow!("{e}"))?;
            out.emit(v.to_string(), json!({ "value": v }));
            Ok(if v { 0 } else { 1 })
        }
        Cmd::Bisim {
            left,
            left_world,
            right,
            right_world,
            left_seq,
            right_seq,
            witness,
        } => {
            let (m, n) = (model(&left)?, model(&right)?);
            let w = m.world_index(&left_world).map_err(|e| anyhow!("{e}"))?;
            let v = n.world_index(&right_world).map_err(|e| anyhow!("{e}"))?;
            let (a, b) = (objects(&m, &left_seq)?, objects(&n, &right_seq)?);
            let g = bisim::Game::new(&m, w, &a, &n, v, &b).map_err(|e| anyhow!("{e}"))?;
            let same = g.bisimilar();
            let mut record = json!({ "bisimilar": same });
            let mut text = same.to_string();
            if witness && same {
                let pairs: Vec<_> = g
                    .relation()
                    .into_iter()
                    .map(|s| {
                        let seq = |k: &KripkeModel, xs: &[usize]| xs.iter().map(|&o| k.objects[o].clone()).collect::<Vec<_>>();
                        let (l, r): (Vec<usize>, Vec<usize>) = s.f.iter().copied().unzip();
                        (m.worlds[s.w].clone(), seq(&m, &l), n.worlds[s.v].clone(), seq(&n, &r))
                    })
                    .collect();
                for (lw, la, rw, rb) in &pairs {
                    text.push_str(&format!("\n({lw}[{}], {rw}[{}])", la.join(","), rb.join(",")));
                }
                record["relation"] = json!(pairs
                    .iter()
                    .map(|(lw, la, rw, rb)| json!({ "left": [lw, la], "right": [rw, rb] }))
                    .collect::<Vec<_>>());
            } else if witness {
                let d = bisim::distinguish(&m, w, &a, &n, v, &b)
                    .map_err(|e| anyhow!("{e}"))?
                    .ok_or_else(|| anyhow!("no distinguishing formula found"))?;
                let s = print_formula(&d);
                text.push_str(&format!("\n{s}"));
                record["distinguishing"] = json!(s);
            }
            out.emit(text, record);
            Ok(if same { 0 } else { 1 })
        }
        Cmd::Translate { formula: s, target, evx } => {
            let f = formula(&s)?;
            let opts = TranslateOptions { evx_guard: evx };
            let text = match target {
                Target::Foml => translate::to_foml_text(&f),
                Target::TwoSorted => translate::to_2sfol_with(&f, "u", opts).to_string(),
                Target::Fol1 | Target::Tptp => {
                    let mut sorts: BTreeMap<_, _> = fm::free_vars(&f).into_iter().map(|x| (x, Sort::Object)).collect();
                    sorts.insert("u".to_string(), Sort::World);
                    let one = translate::to_fol1(&translate::to_2sfol_with(&f, "u", opts), &sorts);
                    match target {
                        Target::Tptp => translate::to_tptp(&one),
                        _ => format!("{}\ntheta: {}\nchi: {}", one.formula, one.theta, one.chi),
                    }
                }
            };
            out.emit(&text, json!({ "translation": text }));
            Ok(0)
        }
        Cmd::Embed { prenex, mode } => {
            let fo = translate::parse_prenex(&read(&prenex)?).map_err(|e| anyhow!("{e}"))?;
            let mode = match mode {
                Mode::DiaBox => EmbedMode::DiaBox,
                Mode::Dia => EmbedMode::Dia,
            };
            let f = translate::embed_prenex_fol(&fo, mode).map_err(|e| anyhow!("{e}"))?;
            let text = print_formula(&f);
            out.emit(&text, json!({ "formula": text }));
            Ok(0)
        }
        Cmd::CheckProof { file, lemmas } => {
            let script = parse_proof(&read(&file)?).map_err(|e| anyhow!("{}: {e}", file.display()))?;
            let mut store: LemmaStore = hilbert::bundled_lemmas().map_err(|e| anyhow!("{e}"))?;
            if let Some(dir) = lemmas {
                store = hilbert::load_lemmas(&dir, store).map_err(|e| anyhow!(e))?;
            }
            match check_proof(&script, &store) {
                Ok(()) => {
                    out.emit("Ok", json!({ "ok": true, "lines": script.lines.len() }));
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("{e}");
                    out.emit("Error", json!({ "ok": false, "line": e.line, "reason": e.reason }));
                    Ok(1)
                }
            }
        }
        Cmd::SearchModel {
            formula: s,
            max_worlds,
            max_objects,
            frames,
            model_out,
        } => {
            if max_worlds == 0 || max_objects == 0 {
                bail!("bounds must be at least 1");
            }
            let f = formula(&s)?;
            let fc = match frames {
                Frames::Arbitrary => FrameClass::Arbitrary,
                Frames::S5 => FrameClass::S5,
            };
            match bounded_search(&f, max_worlds, max_objects, fc) {
                SearchResult::Found(w) => {
                    if let Some(path) = &model_out {
                        write_model(path, &w.model)?;
                    }
                    let names = assignment_names(&w.model, &w.assignment);
                    let shown: Vec<_> = names.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    out.emit(
                        format!(
                            "found at {} [{}]\n{}",
                            w.model.worlds[w.world],
                            shown.join(", "),
                            print_model(&w.model)
                        ),
                        json!({
                            "found": true,
                            "world": w.model.worlds[w.world],
                            "assignment": names,
                            "model": model_to_file(&w.model),
                        }),
                    );
                    Ok(0)
                }
                SearchResult::NotFoundWithinBounds => {
                    out.emit("not found within bounds", json!({ "found": false }));
                    Ok(1)
                }
            }
        }
        Cmd::TestSuite {
            name,
            cases,
            seed,
            dump,
            replay,
        } => {
            if let Some(path) = replay {
                let (recorded, now) = harness::replay(&path).map_err(|e| anyhow!(e))?;
                let again = now.as_ref().err();
                out.emit(
                    match again {
                        Some(m) => format!("still failing: {m}\nrecorded: {recorded}"),
                        None => format!("passes now\nrecorded: {recorded}"),
                    },
                    json!({ "recorded": recorded, "failing": again.is_some(), "message": again }),
                );
                return Ok(if again.is_some() { 1 } else { 0 });
            }
            let cfg = GenConfig { seed, ..GenConfig::default() };
            let r = harness::run_suite(&name, cases, &cfg, dump.as_deref()).map_err(|e| anyhow!(e))?;
            let mut text = format!(
                "{}: {} cases, {} passed, {} failed ({} ms)",
                r.suite, r.cases, r.passed, r.failed, r.elapsed_ms
            );
            for (k, v) in &r.notes {
                text.push_str(&format!("\n  {k}: {v}"));
            }
            for f in &r.failures {
                text.push_str(&format!("\n  case {}: {}", f.case, f.message));
                if let Some(p) = &f.dump {
                    text.push_str(&format!(" [{}]", p.display()));
                }
            }
            out.emit(text, serde_json::to_value(&r)?);
            Ok(if r.failed == 0 { 0 } else { 1 })
        }
    }
}
