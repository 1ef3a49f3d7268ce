//! Batch front-end: parse JSON/text inputs, dispatch to the library, emit
//! JSON results with deterministic formatting.
//!
//! Exit codes: 0 success, 2 validation error (diagnostic on stderr),
//! 3 inconclusive verdict.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use polarlab_core::dieudonne::{cowitt_dieudonne, is_isomorphic, IsoVerdict};
use polarlab_core::dl;
use polarlab_core::fmodule;
use polarlab_core::graded::elem_zero;
use polarlab_core::hopf;
use polarlab_core::json;
use polarlab_core::polar;
use polarlab_core::witt;

#[derive(Parser)]
#[command(name = "polarlab", version, about = "Exact computations with graded p-polar algebras, Witt vectors, Dieudonné modules and Dyer–Lashof operations")]
struct Cli {
    /// Seed fixing all randomized property runs (accepted globally; only
    /// randomized subcommands consult it)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct IoArgs {
    /// Input file (JSON)
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output file; stdout when omitted
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polarize a graded algebra (restrict to the symmetrized p-fold product)
    Polarize(IoArgs),
    /// Split a p-polar algebra into degree-0 part and p-typical blocks
    Split(IoArgs),
    /// Compute the hull (enveloping commutative algebra) of a p-polar algebra
    Hull(IoArgs),
    /// Check associativity/symmetry of μ and decide p-polarity
    Check(IoArgs),
    /// p-typical Witt vector arithmetic over a p-polar carrier
    Witt {
        #[command(subcommand)]
        cmd: WittCmd,
    },
    /// Unipotent co-Witt vectors of a p-polar algebra
    Cowitt {
        #[command(flatten)]
        io: IoArgs,
        /// Truncation stage for the degree-0 colimit
        #[arg(long = "n-max")]
        n_max: Option<usize>,
    },
    /// F-module (Frobenius-module) operations
    Fmod {
        #[command(subcommand)]
        cmd: FmodCmd,
    },
    /// Dieudonné modules of unipotent formal groups
    Dieudonne {
        #[command(subcommand)]
        cmd: DieudonneCmd,
    },
    /// Hopf algebra constructions and cofreeness verification
    Hopf {
        #[command(subcommand)]
        cmd: HopfCmd,
    },
    /// Dyer–Lashof operation rewriting and admissible bases
    Dl {
        #[command(subcommand)]
        cmd: DlCmd,
    },
}

#[derive(Subcommand)]
enum WittCmd {
    /// Witt vector sum u + v over the carrier in -i
    Add {
        #[arg(long)]
        p: u64,
        /// number of Witt vector entries (a_0 … a_{length−1})
        #[arg(long)]
        length: usize,
        #[command(flatten)]
        io: IoArgs,
        /// first summand (Witt vector JSON)
        #[arg(short = 'a')]
        a: PathBuf,
        /// second summand (Witt vector JSON)
        #[arg(short = 'b')]
        b: PathBuf,
    },
    /// Frobenius of a Witt vector
    Frobenius {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        io: IoArgs,
        #[arg(short = 'a')]
        a: PathBuf,
    },
    /// Verschiebung of a Witt vector
    Verschiebung {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        io: IoArgs,
        #[arg(short = 'a')]
        a: PathBuf,
    },
    /// Teichmüller lift of a carrier element
    Teichmuller {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        length: usize,
        /// degree of the lifted element
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        io: IoArgs,
        /// element to lift: JSON basis-coefficient map
        #[arg(short = 'a')]
        a: PathBuf,
    },
}

#[derive(Subcommand)]
enum FmodCmd {
    /// Kuhn barcode decomposition
    Decompose(IoArgs),
    /// Lift an F-module to a p-polar algebra
    Lift(IoArgs),
    /// Continuous dual (V-module)
    Dualize(IoArgs),
}

#[derive(Subcommand)]
enum DieudonneCmd {
    /// Dieudonné module of the unipotent co-Witt vectors of a p-polar algebra
    Compute {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long = "n-max")]
        n_max: Option<usize>,
    },
    /// Decide isomorphism of two Dieudonné modules
    Compare {
        /// first module (JSON)
        a: PathBuf,
        /// second module (JSON)
        b: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HopfCmd {
    /// Cofree conilpotent Hopf algebra on an augmented algebra
    Cofree(IoArgs),
    /// Primitives of a Hopf algebra
    Primitives(IoArgs),
    /// Verify cofreeness (dimension-count criterion)
    VerifyCofree {
        /// "lambda" to verify the Witt-addition Hopf algebra Λ; otherwise
        /// read a Hopf algebra from -i
        target: Option<String>,
        #[arg(short = 'i', long = "input")]
        input: Option<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        /// number of Witt coordinates beyond the first; defaults to the
        /// largest n with j·p^n within the truncation
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "max-degree")]
        max_degree: Option<usize>,
    },
    /// The Hopf algebra Λ^{(1)} representing Witt addition
    Lambda {
        #[arg(long)]
        j: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "max-degree")]
        max_degree: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// The non-cofree/cofree pair of Hopf algebras with equal dimensions
    Counterexample {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        j: usize,
        #[arg(long = "max-degree")]
        max_degree: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DlCmd {
    /// Adem-rewrite a word of Dyer–Lashof operations to admissible form
    Rewrite {
        /// word such as "Q^5 bQ^2 Q^1" (bQ^r is the Bockstein composite)
        word: String,
        #[arg(long)]
        p: u64,
        /// loop parameter n (omitted = ∞) for the range report
        #[arg(long)]
        n: Option<usize>,
        /// degree of the generator the word acts on, for the degree report
        #[arg(long = "gen-degree")]
        gen_degree: Option<usize>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Admissible basis on a generator of degree q
    Basis {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: u64,
        #[arg(long = "max-degree")]
        max_degree: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", path.display()))
}

fn write_out<T: Serialize>(value: &T, output: &Option<PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_algebra(path: &PathBuf) -> Result<polarlab_core::graded::GradedAlgebra> {
    let input: json::AlgebraInput = read_json(path)?;
    Ok(json::algebra_from_input(&input)?)
}

fn load_polar(path: &PathBuf) -> Result<polarlab_core::polar::PolarAlgebra> {
    let j: json::PolarJson = read_json(path)?;
    Ok(json::polar_from_json(&j)?)
}

fn check_p(expected: u64, actual: u64) -> Result<()> {
    if expected != actual {
        bail!("--p {expected} does not match input prime {actual}");
    }
    Ok(())
}

fn lambda_default_n(j: usize, p: u64, max_degree: usize) -> usize {
    let mut n = 0;
    let mut d = j.saturating_mul(p as usize);
    while d <= max_degree {
        n += 1;
        d = d.saturating_mul(p as usize);
    }
    n
}

#[derive(Serialize)]
struct SplitOut {
    degree_zero: json::PolarJson,
    blocks: BTreeMap<usize, json::PolarJson>,
}

#[derive(Serialize)]
struct HullOut {
    algebra: json::AlgebraJson,
    /// image of each source basis element under the unit map u: A → hull(A)
    unit_map: BTreeMap<String, Vec<json::Term>>,
}

#[derive(Serialize)]
struct CheckOut {
    assoc_violations: Vec<String>,
    is_p_polar: bool,
    /// p-polarity is certified only below the degree truncation
    certified_up_to_degree: usize,
}

#[derive(Serialize)]
struct CowittDegreeOut {
    stage: usize,
    order: u128,
    entry_dims: Vec<usize>,
}

#[derive(Serialize)]
struct CowittOut {
    p: u64,
    max_degree: usize,
    deg0_stage: Option<usize>,
    degrees: BTreeMap<usize, CowittDegreeOut>,
}

#[derive(Serialize)]
struct LiftOut {
    polar: json::PolarJson,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct VModuleOut {
    p: u64,
    max_degree: usize,
    basis: Vec<polarlab_core::graded::BasisElem>,
    /// degree q → matrix of V: M_{pq} → M_q
    vmaps: BTreeMap<usize, Vec<Vec<u64>>>,
}

#[derive(Serialize)]
struct CompareOut {
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

#[derive(Serialize)]
struct PrimitivesOut {
    /// degree → number of primitives
    dims: BTreeMap<usize, usize>,
    /// primitive basis vectors, expressed in the input basis
    vectors: Vec<Vec<json::Term>>,
}

#[derive(Serialize)]
struct CofreeOut {
    pass: bool,
    summary: String,
    primitive_dims: BTreeMap<usize, usize>,
    closure_failures: Vec<String>,
    dim_mismatches: Vec<String>,
    generator_mismatches: Vec<String>,
}

#[derive(Serialize)]
struct CounterexampleOut {
    p: u64,
    j: usize,
    max_degree: usize,
    h: json::HopfJson,
    h_prime: json::HopfJson,
    /// dim P(dual −) in degree p²j
    dual_primitive_dim_h: usize,
    dual_primitive_dim_h_prime: usize,
    verify_h_pass: bool,
    verify_h_prime_pass: bool,
}

#[derive(Serialize)]
struct DlRewriteOut {
    p: u64,
    input: String,
    terms: Vec<json::DlTermJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    in_range: Option<bool>,
}

#[derive(Serialize)]
struct DlBasisOut {
    q: usize,
    n: Option<usize>,
    p: u64,
    max_degree: usize,
    words: Vec<String>,
    degrees: Vec<usize>,
    poincare: BTreeMap<usize, usize>,
}

fn cofree_out(r: &hopf::CofreeReport) -> CofreeOut {
    CofreeOut {
        pass: r.pass,
        summary: r.summary(),
        primitive_dims: r.primitive_dims.clone(),
        closure_failures: r.closure_failures.clone(),
        dim_mismatches: r.dim_mismatches.clone(),
        generator_mismatches: r.generator_mismatches.clone(),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Polarize(io) => {
            let a = load_algebra(&io.input)?;
            let pa = polar::polarize(&a);
            write_out(&json::polar_to_json(&pa), &io.output)?;
        }
        Cmd::Split(io) => {
            let a = load_polar(&io.input)?;
            let (zero, blocks) = polar::p_typical_split(&a);
            let out = SplitOut {
                degree_zero: json::polar_to_json(&zero),
                blocks: blocks
                    .iter()
                    .map(|(&j, b)| (j, json::polar_to_json(b)))
                    .collect(),
            };
            write_out(&out, &io.output)?;
        }
        Cmd::Hull(io) => {
            let a = load_polar(&io.input)?;
            let h = polar::hull(&a)?;
            let out = HullOut {
                algebra: json::algebra_to_json(&h.algebra),
                unit_map: a
                    .module
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        (
                            b.name.clone(),
                            json::elem_to_terms(&h.algebra.module, &h.unit_map[i]),
                        )
                    })
                    .collect(),
            };
            write_out(&out, &io.output)?;
        }
        Cmd::Check(io) => {
            let a = load_polar(&io.input)?;
            let assoc = polar::check_assoc(&a);
            let polarity = polar::is_p_polar(&a)?;
            let out = CheckOut {
                assoc_violations: assoc.violations,
                is_p_polar: polarity,
                certified_up_to_degree: a.max_degree(),
            };
            write_out(&out, &io.output)?;
        }
        Cmd::Witt { cmd } => run_witt(cmd)?,
        Cmd::Cowitt { io, n_max } => {
            let a = load_polar(&io.input)?;
            let cw = witt::cowitt(&a, n_max)?;
            let mut degrees = BTreeMap::new();
            for m in cw.degrees() {
                if m == 0 {
                    continue;
                }
                degrees.insert(
                    m,
                    CowittDegreeOut {
                        stage: cw.stage(m).expect("positive degree has a stage"),
                        order: cw.order(m),
                        entry_dims: cw.entry_dims(m),
                    },
                );
            }
            let out = CowittOut {
                p: cw.p(),
                max_degree: a.max_degree(),
                deg0_stage: cw.deg0_stage,
                degrees,
            };
            write_out(&out, &io.output)?;
        }
        Cmd::Fmod { cmd } => run_fmod(cmd)?,
        Cmd::Dieudonne { cmd } => return run_dieudonne(cmd),
        Cmd::Hopf { cmd } => run_hopf(cmd)?,
        Cmd::Dl { cmd } => run_dl(cmd)?,
    }
    Ok(0)
}

fn run_witt(cmd: WittCmd) -> Result<()> {
    match cmd {
        WittCmd::Add { p, length, io, a, b } => {
            let carrier = load_polar(&io.input)?;
            check_p(p, carrier.p())?;
            let ctx = witt::WittContext::new(carrier)?;
            let u: json::WittVectorJson = read_json(&a)?;
            let v: json::WittVectorJson = read_json(&b)?;
            let u = json::witt_from_json(&ctx.carrier.module, &u)?;
            let v = json::witt_from_json(&ctx.carrier.module, &v)?;
            if u.entries.len() != length || v.entries.len() != length {
                bail!(
                    "--length {length} does not match vector lengths {} and {}",
                    u.entries.len(),
                    v.entries.len()
                );
            }
            let sum = ctx.add(&u, &v)?;
            write_out(&json::witt_to_json(&ctx.carrier.module, &sum), &io.output)?;
        }
        WittCmd::Frobenius { p, io, a } => {
            let carrier = load_polar(&io.input)?;
            check_p(p, carrier.p())?;
            let ctx = witt::WittContext::new(carrier)?;
            let v: json::WittVectorJson = read_json(&a)?;
            let v = json::witt_from_json(&ctx.carrier.module, &v)?;
            let fv = ctx.frobenius(&v)?;
            write_out(&json::witt_to_json(&ctx.carrier.module, &fv), &io.output)?;
        }
        WittCmd::Verschiebung { p, io, a } => {
            let carrier = load_polar(&io.input)?;
            check_p(p, carrier.p())?;
            let ctx = witt::WittContext::new(carrier)?;
            let v: json::WittVectorJson = read_json(&a)?;
            let v = json::witt_from_json(&ctx.carrier.module, &v)?;
            let vv = ctx.verschiebung(&v)?;
            write_out(&json::witt_to_json(&ctx.carrier.module, &vv), &io.output)?;
        }
        WittCmd::Teichmuller {
            p,
            length,
            degree,
            io,
            a,
        } => {
            let carrier = load_polar(&io.input)?;
            check_p(p, carrier.p())?;
            let ctx = witt::WittContext::new(carrier)?;
            if length == 0 {
                bail!("--length must be positive");
            }
            let map: BTreeMap<String, u64> = read_json(&a)?;
            let mut e = elem_zero();
            for (name, c) in map {
                let i = ctx.carrier.module.index_of(&name)?;
                let c = c % p;
                if c != 0 {
                    e.insert(i, c);
                }
            }
            let t = ctx.teichmuller(&e, degree, length - 1)?;
            write_out(&json::witt_to_json(&ctx.carrier.module, &t), &io.output)?;
        }
    }
    Ok(())
}

fn run_fmod(cmd: FmodCmd) -> Result<()> {
    match cmd {
        FmodCmd::Decompose(io) => {
            let j: json::FModuleJson = read_json(&io.input)?;
            let m = json::fmodule_from_json(&j)?;
            let bc = fmodule::decompose(&m);
            write_out(&json::barcode_to_json(&bc), &io.output)?;
        }
        FmodCmd::Lift(io) => {
            let j: json::FModuleJson = read_json(&io.input)?;
            let m = json::fmodule_from_json(&j)?;
            let (pa, generators) = fmodule::lift_to_polar(&m)?;
            let out = LiftOut {
                polar: json::polar_to_json(&pa),
                generators,
            };
            write_out(&out, &io.output)?;
        }
        FmodCmd::Dualize(io) => {
            let j: json::FModuleJson = read_json(&io.input)?;
            let m = json::fmodule_from_json(&j)?;
            let v = fmodule::dualize(&m);
            let out = VModuleOut {
                p: v.module.p,
                max_degree: v.module.max_degree,
                basis: v.module.basis.clone(),
                vmaps: v
                    .maps
                    .iter()
                    .map(|(&q, mat)| {
                        (q, (0..mat.rows).map(|r| mat.row(r).to_vec()).collect())
                    })
                    .collect(),
            };
            write_out(&out, &io.output)?;
        }
    }
    Ok(())
}

fn run_dieudonne(cmd: DieudonneCmd) -> Result<u8> {
    match cmd {
        DieudonneCmd::Compute { io, n_max } => {
            let a = load_polar(&io.input)?;
            let m = cowitt_dieudonne(&a, n_max)?;
            write_out(&json::dieudonne_to_json(&m), &io.output)?;
            Ok(0)
        }
        DieudonneCmd::Compare { a, b, output } => {
            let ja: json::DieudonneJson = read_json(&a)?;
            let jb: json::DieudonneJson = read_json(&b)?;
            let ma = json::dieudonne_from_json(&ja)?;
            let mb = json::dieudonne_from_json(&jb)?;
            match is_isomorphic(&ma, &mb) {
                IsoVerdict::Yes => {
                    write_out(
                        &CompareOut {
                            verdict: "yes".into(),
                            witness: None,
                        },
                        &output,
                    )?;
                    Ok(0)
                }
                IsoVerdict::No(witness) => {
                    write_out(
                        &CompareOut {
                            verdict: "no".into(),
                            witness: Some(witness),
                        },
                        &output,
                    )?;
                    Ok(0)
                }
                IsoVerdict::Inconclusive => {
                    write_out(
                        &CompareOut {
                            verdict: "inconclusive".into(),
                            witness: None,
                        },
                        &output,
                    )?;
                    Ok(3)
                }
            }
        }
    }
}

fn run_hopf(cmd: HopfCmd) -> Result<()> {
    match cmd {
        HopfCmd::Cofree(io) => {
            let a = load_algebra(&io.input)?;
            let h = hopf::cof_u(&a)?;
            write_out(&json::hopf_to_json(&h), &io.output)?;
        }
        HopfCmd::Primitives(io) => {
            let input: json::HopfInput = read_json(&io.input)?;
            let h = json::hopf_from_input(&input)?;
            let prim = hopf::primitives(&h)?;
            let out = PrimitivesOut {
                dims: prim.module.dims_by_degree(),
                vectors: prim
                    .vectors
                    .iter()
                    .map(|v| json::elem_to_terms(&h.algebra.module, v))
                    .collect(),
            };
            write_out(&out, &io.output)?;
        }
        HopfCmd::VerifyCofree {
            target,
            input,
            output,
            j,
            p,
            n,
            max_degree,
        } => {
            let h = match target.as_deref() {
                Some("lambda") => {
                    let j = j.ok_or_else(|| anyhow!("--j is required with `lambda`"))?;
                    let p = p.ok_or_else(|| anyhow!("--p is required with `lambda`"))?;
                    let d = max_degree
                        .ok_or_else(|| anyhow!("--max-degree is required with `lambda`"))?;
                    let n = n.unwrap_or_else(|| lambda_default_n(j, p, d));
                    hopf::lambda_p(j, p, n, d)?
                }
                Some(other) => bail!("unknown verify-cofree target `{other}`"),
                None => {
                    let path =
                        input.ok_or_else(|| anyhow!("provide -i or the `lambda` target"))?;
                    let input: json::HopfInput = read_json(&path)?;
                    json::hopf_from_input(&input)?
                }
            };
            let report = hopf::verify_cofree(&h)?;
            write_out(&cofree_out(&report), &output)?;
        }
        HopfCmd::Lambda {
            j,
            p,
            n,
            max_degree,
            output,
        } => {
            let n = n.unwrap_or_else(|| lambda_default_n(j, p, max_degree));
            let h = hopf::lambda_p(j, p, n, max_degree)?;
            write_out(&json::hopf_to_json(&h), &output)?;
        }
        HopfCmd::Counterexample {
            p,
            j,
            max_degree,
            output,
        } => {
            let (h, h_prime) = hopf::counterexample_pair(p, j, max_degree)?;
            let target = p as usize * p as usize * j;
            let dim_at = |hh: &hopf::HopfAlgebra| -> Result<usize> {
                let d = hopf::dual(hh)?;
                let prim = hopf::primitives(&d)?;
                Ok(prim.module.dims_by_degree().get(&target).copied().unwrap_or(0))
            };
            let out = CounterexampleOut {
                p,
                j,
                max_degree,
                dual_primitive_dim_h: dim_at(&h)?,
                dual_primitive_dim_h_prime: dim_at(&h_prime)?,
                verify_h_pass: hopf::verify_cofree(&h)?.pass,
                verify_h_prime_pass: hopf::verify_cofree(&h_prime)?.pass,
                h: json::hopf_to_json(&h),
                h_prime: json::hopf_to_json(&h_prime),
            };
            write_out(&out, &output)?;
        }
    }
    Ok(())
}

fn run_dl(cmd: DlCmd) -> Result<()> {
    match cmd {
        DlCmd::Rewrite {
            word,
            p,
            n,
            gen_degree,
            output,
        } => {
            let m = dl::DLMonomial::parse(&word)?;
            let degree = gen_degree.map(|q| dl::dl_degree(&m, q as i64, p));
            let in_range =
                gen_degree.map(|q| dl::in_range(&m, q as i64, p, n.map(|v| v as i64)));
            let e = dl::DLExpression::monomial(p, m);
            let rewritten = dl::adem_rewrite(&e)?;
            let out = DlRewriteOut {
                p,
                input: word,
                terms: json::dl_to_json(&rewritten).terms,
                degree,
                in_range,
            };
            write_out(&out, &output)?;
        }
        DlCmd::Basis {
            q,
            n,
            p,
            max_degree,
            output,
        } => {
            let basis = dl::admissible_basis(q, n, p, max_degree)?;
            let out = DlBasisOut {
                q,
                n,
                p,
                max_degree,
                words: basis.words.iter().map(|w| w.to_string()).collect(),
                degrees: basis.degrees.clone(),
                poincare: basis.poincare.clone(),
            };
            write_out(&out, &output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
