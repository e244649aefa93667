//! The `iwasawa` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::characters::{eval_char, verify_cover};
use crate::error::{Error, Result};
use crate::group_ring::TightSet;
use crate::ideals::{IdealMembership, IdealSpec};
use crate::parse;
use crate::report::{summary_line, tower_csv, tower_json};
use crate::sampling::cross_check;
use crate::session::{ConfigFile, SessionConfig};
use crate::towers::{capitulation_tower, ddot_profile, rank_growth, TowerReport};

#[derive(Debug, Parser)]
#[command(name = "iwasawa", version, about = "Finite-level Iwasawa algebra computations")]
pub struct Cli {
    /// Prime (2, 3 or 5)
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Rank d of Gamma
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Coefficient precision N
    #[arg(long = "prec", short = 'N', global = true)]
    pub prec: Option<u32>,
    /// Working level m
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// key = value settings file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Character enumeration cap
    #[arg(long, env = "IWASAWA_CHAR_CAP", global = true)]
    pub char_cap: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Linear,
    Char,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value of a character on an element
    Eval {
        #[arg(long = "char")]
        character: String,
        #[arg(long)]
        elem: String,
    },
    /// Ideal membership, exact or via characters
    Member {
        #[arg(long)]
        elem: Option<String>,
        #[arg(long)]
        ideal: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Cross-check this many members and non-members instead of one element
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Kernels of the norm maps on Y/J_n Y
    Tower {
        #[arg(long)]
        module: String,
        /// I (augmentation) or J (tight)
        #[arg(long, default_value = "J")]
        family: String,
        #[arg(long)]
        tight: Option<String>,
        #[arg(long)]
        nmax: u32,
        #[arg(long)]
        mmax: u32,
        /// Output prefix for .csv and .json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The tower A_n = X/J_n and its capitulation kernels
    Capitulation {
        #[arg(long)]
        module: String,
        #[arg(long)]
        tight: Option<String>,
        /// Pairs `j=x; j=[x1,x2]`, j indexing the tight set from 1
        #[arg(long, default_value = "")]
        inertia: String,
        #[arg(long)]
        nmax: u32,
        #[arg(long)]
        mmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the zero set of an element with a union of flats
    Cover {
        #[arg(long)]
        f: String,
        /// `gamma=root@level; ...` per flat, flats separated by `|`
        #[arg(long)]
        flats: String,
    },
    /// Visible ranks of Y/I_n Y
    Rank {
        #[arg(long)]
        module: String,
        #[arg(long)]
        nmax: u32,
    },
}

/// Exit status for an error: 2 for bad input, 3 for caps and resources,
/// 4 for a violated invariant.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::PrecisionTooLarge { .. } => 3,
        Error::Compatibility(_) => 4,
        _ => 2,
    }
}

struct Session {
    cfg: SessionConfig,
    level_set: bool,
}

impl Session {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg = SessionConfig::default();
        let mut level_set = false;
        if let Some(path) = &cli.config {
            let file = ConfigFile::load(path)?;
            level_set |= file.m.is_some();
            file.apply(&mut cfg);
        }
        cfg.p = cli.p.unwrap_or(cfg.p);
        cfg.d = cli.d.unwrap_or(cfg.d);
        cfg.prec = cli.prec.unwrap_or(cfg.prec);
        if let Some(m) = cli.level {
            cfg.m = m;
            level_set = true;
        }
        cfg.char_cap = cli.char_cap.unwrap_or(cfg.char_cap);
        Ok(Session { cfg, level_set })
    }

    /// Uses `default` as the level unless one was given explicitly.
    fn with_default_level(&mut self, default: u32) -> Result<()> {
        if !self.level_set {
            self.cfg.m = default;
        }
        self.cfg.validate()
    }

    fn tight(&self, src: &Option<String>) -> Result<TightSet> {
        match src {
            Some(s) => parse::parse_tight_set(s, self.cfg.d),
            None => Ok(TightSet::standard(self.cfg.d)),
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Config(format!("i/o: {e}"))
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut s = Session::from_cli(cli)?;
    match &cli.command {
        Command::Eval { character, elem } => {
            let chi = parse::parse_character(character, s.cfg.p, s.cfg.d)?;
            let e = parse::parse_expr(elem, s.cfg.d)?;
            let level = s.cfg.m.max(chi.level()).max(e.max_index().max(0) as u32);
            s.with_default_level(level)?;
            let ring = s.cfg.ring()?;
            let v = eval_char(&chi, &e.eval(&ring)?)?;
            writeln!(out, "character: {chi}").map_err(io)?;
            writeln!(out, "element: {e}").map_err(io)?;
            writeln!(out, "value: {:?}", v.coeffs()).map_err(io)?;
            writeln!(out, "valuation: {}", v.valuation()).map_err(io)?;
            Ok(0)
        }
        Command::Member { elem, ideal, method, samples, seed } => {
            let spec = parse::parse_ideal(ideal, s.cfg.d)?;
            s.with_default_level(spec.required_level().max(0) as u32)?;
            let ring = s.cfg.ring()?;
            let membership = IdealMembership::new(&spec, &ring)?;
            let use_char = *method != Method::Linear;
            if use_char && !matches!(spec, IdealSpec::Rn { .. }) {
                return Err(Error::Precondition("the character test applies to RN ideals".into()));
            }
            let delta = if use_char { Some(membership.delta(s.cfg.char_cap)?) } else { None };
            if let Some(count) = samples {
                let delta = delta.as_ref().ok_or_else(|| Error::Precondition("sampling compares both methods".into()))?;
                let check = cross_check(&membership, delta, *count, seed.unwrap_or(0))?;
                writeln!(
                    out,
                    "samples: {} agreement: {}/{} ({:.2}%)",
                    check.samples,
                    check.agreements,
                    check.samples,
                    100.0 * check.rate()
                )
                .map_err(io)?;
                for (coeffs, expected) in &check.witnesses {
                    writeln!(err, "witness: expected member={expected} coeffs={coeffs:?}").map_err(io)?;
                }
                return Ok(if check.witnesses.is_empty() { 0 } else { 4 });
            }
            let Some(elem) = elem else {
                return Err(Error::Precondition("--elem or --samples is required".into()));
            };
            let x = parse::parse_expr(elem, s.cfg.d)?.eval(&ring)?;
            let lin = (*method != Method::Char).then(|| membership.member_linear(&x)).transpose()?;
            let chr = match &delta {
                Some(d) => Some(membership.member_char(&x, d)?),
                None => None,
            };
            if let Some(v) = lin {
                writeln!(out, "linear: {v}").map_err(io)?;
            }
            if let Some(v) = chr {
                writeln!(out, "char: {v}").map_err(io)?;
                writeln!(
                    out,
                    "note: character test over {} characters at level {}, precision p^{}",
                    delta.as_ref().map_or(0, |d| d.len()),
                    ring.level(),
                    ring.prec()
                )
                .map_err(io)?;
            }
            if let (Some(a), Some(b)) = (lin, chr) {
                writeln!(out, "agree: {}", a == b).map_err(io)?;
                if a != b {
                    writeln!(err, "witness: {elem} linear={a} char={b}").map_err(io)?;
                    return Ok(4);
                }
            }
            Ok(0)
        }
        Command::Tower { module, family, tight, nmax, mmax, out: prefix } => {
            s.with_default_level(*mmax)?;
            let pres = parse::parse_module(module, s.cfg.d)?;
            s.cfg.check_module(pres.generators())?;
            let taus = s.tight(tight)?;
            let fam = parse::parse_family(family, &taus)?;
            let ring = s.cfg.ring()?;
            let report = ddot_profile(&pres, &fam, *nmax, *mmax, &ring, s.cfg.chain_cap)?;
            let input = BTreeMap::from([
                ("command".to_string(), "tower".to_string()),
                ("module".to_string(), module.clone()),
                ("family".to_string(), fam.label()),
                ("nmax".to_string(), nmax.to_string()),
                ("mmax".to_string(), mmax.to_string()),
            ]);
            emit(&s.cfg, &input, &report, prefix, out)?;
            Ok(0)
        }
        Command::Capitulation { module, tight, inertia, nmax, mmax, out: prefix } => {
            s.with_default_level(*mmax)?;
            let pres = parse::parse_module(module, s.cfg.d)?;
            s.cfg.check_module(pres.generators())?;
            let taus = s.tight(tight)?;
            let datum = parse::parse_inertia(inertia, s.cfg.d, pres.generators())?;
            let ring = s.cfg.ring()?;
            let report = capitulation_tower(&pres, &taus, &datum, *nmax, *mmax, &ring, s.cfg.chain_cap)?;
            for q in &report.quotients {
                let parts: Vec<String> = q.exponents.iter().map(|e| format!("Z/p^{e}")).collect();
                let shape = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
                writeln!(out, "A_{}: {shape}", q.n).map_err(io)?;
            }
            let input = BTreeMap::from([
                ("command".to_string(), "capitulation".to_string()),
                ("module".to_string(), module.clone()),
                ("tight".to_string(), taus.taus().iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")),
                ("inertia".to_string(), inertia.clone()),
                ("nmax".to_string(), nmax.to_string()),
                ("mmax".to_string(), mmax.to_string()),
            ]);
            emit(&s.cfg, &input, &report, prefix, out)?;
            Ok(0)
        }
        Command::Cover { f, flats } => {
            let e = parse::parse_expr(f, s.cfg.d)?;
            let flats = parse::parse_flats(flats, s.cfg.p, s.cfg.d)?;
            s.with_default_level(s.cfg.m.max(e.max_index().max(0) as u32))?;
            let ring = s.cfg.ring()?;
            let rep = verify_cover(&e, &flats, &ring, s.cfg.char_cap)?;
            writeln!(out, "zero set: {} characters at level {}", rep.zero_set_size, rep.level).map_err(io)?;
            writeln!(out, "cover: {} characters", rep.cover_size).map_err(io)?;
            for c in &rep.uncovered {
                writeln!(out, "uncovered: {c}").map_err(io)?;
            }
            for c in &rep.spurious {
                writeln!(out, "spurious: {c}").map_err(io)?;
            }
            if let Some(note) = &rep.caveat {
                writeln!(out, "note: {note}").map_err(io)?;
            }
            writeln!(out, "equal: {}", rep.equal).map_err(io)?;
            Ok(if rep.equal { 0 } else { 4 })
        }
        Command::Rank { module, nmax } => {
            s.with_default_level(*nmax)?;
            let pres = parse::parse_module(module, s.cfg.d)?;
            s.cfg.check_module(pres.generators())?;
            let growth = rank_growth(&pres, s.cfg.p, s.cfg.d, *nmax, s.cfg.prec)?;
            writeln!(out, "n,visible_rank,visible_rank_next,ratio").map_err(io)?;
            for e in &growth.entries {
                writeln!(out, "{},{},{},{}", e.n, e.visible_rank, e.visible_rank_next, e.ratio).map_err(io)?;
            }
            writeln!(out, "leading: {}", growth.leading).map_err(io)?;
            Ok(0)
        }
    }
}

fn emit(
    cfg: &SessionConfig,
    input: &BTreeMap<String, String>,
    report: &TowerReport,
    prefix: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<()> {
    let csv = tower_csv(report)?;
    match prefix {
        Some(p) => {
            let csv_path = p.with_extension("csv");
            let json_path = p.with_extension("json");
            std::fs::write(&csv_path, csv).map_err(io)?;
            std::fs::write(&json_path, tower_json(cfg, input, report)?).map_err(io)?;
            writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display()).map_err(io)?;
        }
        None => write!(out, "{csv}").map_err(io)?,
    }
    writeln!(out, "{}", summary_line(report)).map_err(io)
}
