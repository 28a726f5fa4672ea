use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use forcelab_core::harness::{replay, run_suite, Bundle, FormulaSpace, HarnessError, InstanceSpace, NameSpec, Suite};
use forcelab_core::names::{parse_names, quasi_interpret, NameTable};
use forcelab_core::principles::{Instance, Principle};
use forcelab_core::semantics::{boolean_value, forces, forces_by_generics, Formula, NameEnv};
use forcelab_core::synth::{family_for_formula, family_for_formula_bounded, guarantee_counterexample};
use forcelab_core::ultrapower::{boolean_forcing, los_sweep, ultrafilter_at, QuotientModel, Universe};
use forcelab_core::{bits, fixtures, order, BoolAlg, Error, Forcing, Poset};

#[derive(Parser)]
#[command(name = "forcelab", version, about = "Finite forcing workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and inspect posets
    Poset {
        #[command(subcommand)]
        op: PosetOp,
    },
    /// Print the atoms of the Boolean completion and the embedding table
    Complete { poset: String },
    /// Inspect names
    Name {
        #[command(subcommand)]
        op: NameOp,
    },
    /// Decide whether a condition forces a formula
    Force {
        poset: String,
        /// Name declarations, inline or as a file
        names: String,
        formula: String,
        #[arg(long)]
        at: String,
    },
    /// Boolean value of a formula
    Bval { poset: String, names: String, formula: String },
    /// Build a dense family guaranteeing a formula
    Synth {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        names: String,
        #[arg(long)]
        poset: String,
        /// Build m-bounded families over the Boolean completion
        #[arg(long)]
        bounded: Option<usize>,
        /// Check the guarantee against every filter; exit 1 on a violation
        #[arg(long)]
        certify: bool,
    },
    /// Check a principle on an instance file; exit 0 holds, 1 fails, 2 error
    Check {
        /// fa, n, phi-n, sim-n or hamkins
        principle: String,
        instance: PathBuf,
    },
    /// Boolean ultrapower of a poset's completion by one ultrafilter
    Ultrapower {
        poset: String,
        /// Atom label, `a` or `[a]`
        #[arg(long)]
        ultrafilter: String,
        /// Name universe as `rank,entries,base`
        #[arg(long, default_value = "2,2,2")]
        universe: String,
        /// Depth of the formulas in the Łoś report
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Run property suites
    Suite {
        #[command(subcommand)]
        op: SuiteOp,
    },
    /// Re-check a counterexample bundle
    Replay { bundle: PathBuf },
}

#[derive(Subcommand)]
enum PosetOp {
    /// Validate a poset file and print its properties
    Check { file: String },
    /// List the nonempty filters
    Filters {
        file: String,
        /// Only the generic ones
        #[arg(long)]
        generic: bool,
    },
}

#[derive(Subcommand)]
enum NameOp {
    Rank { poset: String, names: String },
    Classify { poset: String, names: String },
    /// Interpret every name under a filter
    Interpret {
        poset: String,
        names: String,
        /// Generators of the filter, comma separated
        #[arg(long)]
        filter: String,
    },
}

#[derive(Subcommand)]
enum SuiteOp {
    Run(RunArgs),
    /// List suites and their properties
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Instance space as TOML; flags below override it
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    max_poset: Option<usize>,
    #[arg(long)]
    rank: Option<u32>,
    #[arg(long)]
    base: Option<u32>,
    #[arg(long)]
    entries: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    no_fixtures: bool,
    /// Names drawn per poset instead of all
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Suites to run; all when omitted
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Write counterexample bundles here
    #[arg(long)]
    bundles: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Text given inline, or read from the file it names.
fn text_arg(arg: &str) -> Result<String, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| io(path, e))
    } else {
        Ok(arg.to_string())
    }
}

fn io(path: &Path, e: std::io::Error) -> Error {
    HarnessError::Io(format!("{}: {e}", path.display())).into()
}

/// A built-in fixture name, a poset file, or inline poset text.
fn load_poset(arg: &str) -> Result<Poset, Error> {
    if let Some(p) = fixtures::builtin(arg) {
        return Ok(p);
    }
    Ok(order::parse_poset(&text_arg(arg)?)?)
}

fn load_names(p: &Poset, arg: &str) -> Result<NameTable, Error> {
    Ok(parse_names(&text_arg(arg)?, p)?)
}

fn env_of(table: &NameTable) -> NameEnv {
    table.names.iter().map(|(k, v)| (Arc::from(k.as_str()), v.clone())).collect()
}

fn filter_of(p: &Poset, list: &str) -> Result<order::Filter, Error> {
    let ids: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(p.generated_filter(p.mask_of(&ids)?)?)
}

fn run(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Poset { op: PosetOp::Check { file } } => {
            let posets = match fixtures::builtin(&file) {
                Some(p) => vec![p],
                None => order::parse_posets(&text_arg(&file)?)?,
            };
            for p in posets {
                println!("poset {}: {} elements, top {}", p.name(), p.len(), p.id(p.top()));
                let covers: Vec<String> = p.covers().iter().map(|&(a, b)| format!("{}<{}", p.id(a), p.id(b))).collect();
                println!("  covers {}", covers.join(" "));
                println!("  minimal {}", p.format_set(p.minimal()));
                println!("  separative {}", p.is_separative());
                println!("  well-met {}", p.is_well_met());
                println!("  filters {}", p.filters(false).len());
            }
        }
        Command::Poset { op: PosetOp::Filters { file, generic } } => {
            let p = load_poset(&file)?;
            let gs = if generic { p.generic_filters() } else { p.filters(false) };
            for g in gs {
                println!("{}", p.format_set(g.members));
            }
        }
        Command::Complete { poset } => {
            let p = load_poset(&poset)?;
            let alg = BoolAlg::complete(&p);
            println!("atoms {}: {}", alg.atoms(), alg.labels().join(" "));
            for q in 0..p.len() {
                println!("  {} -> {}", p.id(q), alg.format(alg.embed(q)));
            }
        }
        Command::Name { op } => name_cmd(op)?,
        Command::Force { poset, names, formula, at } => {
            let f = Forcing::new(load_poset(&poset)?);
            let env = env_of(&load_names(&f.poset, &names)?);
            let phi = Formula::parse(&formula)?;
            let q = f.poset.index_of(&at)?;
            let yes = forces(&f, q, &phi, &env)?;
            let by_generics = forces_by_generics(&f, q, &phi, &env)?;
            println!("{} {} {phi}", at, if yes { "forces" } else { "does not force" });
            println!("generic check agrees: {}", yes == by_generics);
            return Ok(ExitCode::from(if yes { 0 } else { 1 }));
        }
        Command::Bval { poset, names, formula } => {
            let f = Forcing::new(load_poset(&poset)?);
            let env = env_of(&load_names(&f.poset, &names)?);
            let phi = Formula::parse(&formula)?;
            let v = boolean_value(&f, &phi, &env)?;
            let forcing = (0..f.poset.len()).filter(|&q| bits::subset(f.embed(q), v)).fold(0, |m, q| m | bits::bit(q));
            println!("value {}", f.alg.format(v));
            println!("forced below {}", f.poset.format_set(forcing));
        }
        Command::Synth { formula, names, poset, bounded, certify } => {
            let src = load_poset(&poset)?;
            // Bounded families live on the completion, where names carry Boolean conditions.
            let f = match bounded {
                Some(_) => Forcing::boolean(&BoolAlg::complete(&src), &format!("B({})", src.name()))?,
                None => Forcing::new(src),
            };
            let env = env_of(&load_names(&f.poset, &names)?);
            let phi = Formula::parse(&formula)?;
            let family = match bounded {
                Some(m) => family_for_formula_bounded(&f, &phi, &env, m)?,
                None => family_for_formula(&f, &phi, &env)?,
            };
            println!("family of {} sets for {phi}", family.len());
            print!("{}", family.render(&f));
            let dense = family.masks().iter().all(|&d| f.poset.is_predense(d));
            println!("all predense: {dense}");
            if certify {
                match guarantee_counterexample(&f, &family, &phi, &env)? {
                    None => println!("guarantee holds for every filter meeting the family"),
                    Some(g) => {
                        println!("guarantee fails at {}", f.poset.format_set(g.members));
                        return Ok(ExitCode::from(1));
                    }
                }
            }
        }
        Command::Check { principle, instance } => {
            let which: Principle = principle.parse()?;
            let text = std::fs::read_to_string(&instance).map_err(|e| io(&instance, e))?;
            let report = Instance::parse(&text)?.run(which)?;
            println!("{report}");
            return Ok(ExitCode::from(if report.holds() { 0 } else { 1 }));
        }
        Command::Ultrapower { poset, ultrafilter, universe, depth } => {
            return ultrapower_cmd(&poset, &ultrafilter, &universe, depth);
        }
        Command::Suite { op: SuiteOp::List } => {
            for s in Suite::ALL {
                let props: Vec<String> = s
                    .properties()
                    .iter()
                    .map(|(p, probe)| if *probe { format!("{p} (probe)") } else { p.to_string() })
                    .collect();
                println!("{s}: {}", props.join(", "));
            }
        }
        Command::Suite { op: SuiteOp::Run(args) } => return suite_cmd(args),
        Command::Replay { bundle } => {
            let b = Bundle::load(&bundle)?;
            let got = replay(&b)?;
            println!("{}/{}: recorded {}, replayed {got}", b.suite, b.property, b.verdict);
            if !b.detail.is_empty() {
                println!("  {}", b.detail);
            }
            return Ok(ExitCode::from(if got == b.verdict { 0 } else { 1 }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn name_cmd(op: NameOp) -> Result<(), Error> {
    match op {
        NameOp::Rank { poset, names } => {
            let p = load_poset(&poset)?;
            for (id, s) in load_names(&p, &names)?.names {
                println!("{id}\t{}", s.rank());
            }
        }
        NameOp::Classify { poset, names } => {
            let p = load_poset(&poset)?;
            for (id, s) in load_names(&p, &names)?.names {
                let kind = match s.as_check(p.top()) {
                    Some(x) => format!("check {x}"),
                    None if s.is_empty_name() => "empty".into(),
                    None if s.is_flat() => "flat".into(),
                    None => "nested".into(),
                };
                println!(
                    "{id}\trank {}\t{kind}\t{}-small\t{}-bounded",
                    s.rank(),
                    s.max_width(),
                    s.max_bound()
                );
            }
        }
        NameOp::Interpret { poset, names, filter } => {
            let f = Forcing::new(load_poset(&poset)?);
            let g = filter_of(&f.poset, &filter)?;
            println!("filter {}", f.poset.format_set(g.members));
            for (id, s) in load_names(&f.poset, &names)?.names {
                let x = s.interpret(&g);
                match quasi_interpret(&f, &s, &g) {
                    Ok(q) if q != x => println!("{id}\t{x}\tquasi {q} (differs)"),
                    Ok(q) => println!("{id}\t{x}\tquasi {q}"),
                    Err(_) => println!("{id}\t{x}"),
                }
            }
        }
    }
    Ok(())
}

fn ultrapower_cmd(poset: &str, atom: &str, universe: &str, depth: usize) -> Result<ExitCode, Error> {
    let caps: Vec<usize> = universe
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad_universe(universe))?;
    let [rank, entries, base] = caps[..] else {
        return Err(bad_universe(universe));
    };
    let src = load_poset(poset)?;
    let alg = BoolAlg::complete(&src);
    let u = Universe::new(boolean_forcing(&src)?, NameSpec::new(rank as u32, base as u32, entries))?;
    let m = QuotientModel::build(&u, ultrafilter_at(&alg, atom)?)?;
    let fp = &u.forcing.poset;
    println!("universe {} names, {} classes under {}", u.len(), m.classes(), alg.labels()[m.atom]);
    for c in 0..m.classes() {
        let size = m.class_of.iter().filter(|&&k| k == c).count();
        let members: Vec<String> = m.members[c].iter().map(|d| d.to_string()).collect();
        println!("  class {c}: {size} names, rep {}, members {{{}}}", m.rep(c).to_dsl(fp), members.join(","));
    }
    println!("j-image:");
    for (x, c) in m.j_image() {
        println!("  j({x}) = class {c}");
    }
    println!("j embedding {}, onto {}", m.j_is_embedding(), m.j_is_onto());
    let formulas = FormulaSpace::standard(depth).enumerate()?;
    let all: Vec<usize> = (0..u.len()).collect();
    let los = los_sweep(&u, &all, std::slice::from_ref(&m), &formulas, "s")?;
    println!("los: {} checks at depth {depth}, {} failures", los.checks, los.failures.len());
    if let Some(x) = los.failures.first() {
        println!("  first: {} with s = {}", x.formula, x.name.to_dsl(fp));
    }
    Ok(ExitCode::from(if los.failures.is_empty() { 0 } else { 1 }))
}

fn bad_universe(text: &str) -> Error {
    HarnessError::Space(format!("universe `{text}` is not rank,entries,base")).into()
}

fn suite_cmd(a: RunArgs) -> Result<ExitCode, Error> {
    let mut space = match &a.space {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
            toml::from_str(&text).map_err(|e| HarnessError::Space(e.to_string()))?
        }
        None => InstanceSpace::default(),
    };
    if let Some(k) = a.max_poset {
        space.max_poset = k;
    }
    if let Some(r) = a.rank {
        space.names.rank = r;
    }
    if let Some(b) = a.base {
        space.names.base = b;
    }
    if let Some(e) = a.entries {
        space.names.entries = e;
    }
    if let Some(d) = a.depth {
        space.depth = d;
    }
    if a.no_fixtures {
        space.fixtures = false;
    }
    if a.sample.is_some() {
        space.sample = a.sample;
    }
    if let Some(s) = a.seed {
        space.seed = s;
    }
    let suites: Vec<Suite> = if a.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suites.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let report = run_suite(&space, &suites)?;
    print!("{report}");
    println!("# suite\tproperty\tinstances\tfailures");
    for line in report.machine_lines() {
        println!("{line}");
    }
    if let Some(dir) = &a.bundles {
        for path in report.write_bundles(dir)? {
            println!("# bundle {}: {}", path.display(), Bundle::replay_command(&path));
        }
    }
    Ok(ExitCode::from(if report.passed() { 0 } else { 1 }))
}
