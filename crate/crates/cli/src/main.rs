//! File-in/CSV-out driver for the heatlab library: decomposition validation,
//! on-diagonal decay curves, perturbation probes, convolution-power curves,
//! and local-limit grids.
//!
//! Exit codes: 0 success, 1 domain or verdict failure, 2 input error,
//! 3 numerical non-convergence.  All outputs are deterministic for fixed
//! inputs, flags, and seed, independent of worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heatlab::decomp::{SymbolDecomposition, ValidateConfig};
use heatlab::error::Error;
use heatlab::kernel::{phi_rescaled_large, phi_rescaled_small};
use heatlab::lattice::{expansion_residual, llt_grid, supnorm_curve, LatticeFunction, LltSpec};
use heatlab::numeric::logspace;
use heatlab::perturb::{
    perturbed_kernel_rescaled_large, subhomogeneity_probe, Perturbation, ProbeConfig,
};
use heatlab::quad::QuadratureSpec;
use heatlab::scaling::Verdict;

#[derive(Parser)]
#[command(
    name = "heatlab",
    version,
    about = "Numerical laboratory for heat-kernel decay of sheared two-block symbols"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct QuadArgs {
    /// Starting quadrature nodes per axis (refined automatically).
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    /// Pointwise tail tolerance for automatic integration domains.
    #[arg(long = "quad-tail")]
    quad_tail: Option<f64>,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        let mut q = QuadratureSpec::default();
        if let Some(n) = self.quad_nodes {
            q.nodes_per_axis = n;
        }
        if let Some(t) = self.quad_tail {
            q.tail_tol = t;
        }
        q
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a decomposition file against the structural hypotheses and
    /// report its decay exponents.
    Validate {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory receiving validate_report.json in addition to the
        /// stdout report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// On-diagonal decay curve over a log-spaced time range, using the
    /// rescaled representation on each side of t = 1.
    PhiCurve {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        tmin: f64,
        #[arg(long, default_value_t = 1e4)]
        tmax: f64,
        #[arg(long, default_value_t = 33)]
        points: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Probe a perturbation for subhomogeneity; on a pass, also tabulate the
    /// rescaled large-time constants of the perturbed kernel.
    Perturb {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        perturb: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Sup-norm decay curve of convolution powers.
    Convpow {
        #[arg(long)]
        lattice: PathBuf,
        /// Comma-separated, strictly increasing powers.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Exponent of the n^mu * supnorm column.
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Local limit comparison: dump the convolution power and its
    /// heat-kernel attractor over the comparison window.
    Llt {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
        /// Maximizer of the transform modulus, comma-separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        xi0: Vec<f64>,
        /// Drift vector, comma-separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        alpha: Vec<f64>,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

enum Failure {
    Verdict(String),
    Input(String),
    NonConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::NonConvergence { .. } | Error::TailBound { .. } => {
                Failure::NonConvergence(e.to_string())
            }
            Error::Degenerate(_) | Error::WindowClipped(_) => Failure::Verdict(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            eprintln!("verdict failure: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("non-convergence: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Validate { decomp, seed, out } => cmd_validate(&decomp, seed, out.as_deref()),
        Cmd::PhiCurve {
            decomp,
            tmin,
            tmax,
            points,
            out,
            seed,
            quad,
        } => cmd_phi_curve(&decomp, tmin, tmax, points, &out, seed, &quad.spec()),
        Cmd::Perturb {
            decomp,
            perturb,
            out,
            seed,
            quad,
        } => cmd_perturb(&decomp, &perturb, &out, seed, &quad.spec()),
        Cmd::Convpow {
            lattice,
            n,
            mu,
            out,
        } => cmd_convpow(&lattice, &n, mu, &out),
        Cmd::Llt {
            lattice,
            decomp,
            xi0,
            alpha,
            n,
            out,
            quad,
        } => cmd_llt(&lattice, &decomp, xi0, alpha, n, &out, &quad.spec()),
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("cannot parse {}: {e}", path.display())))
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn validated(d: &SymbolDecomposition, seed: u64) -> Result<(), Failure> {
    let report = d.validate(&ValidateConfig {
        seed,
        ..ValidateConfig::default()
    });
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verdict(format!(
            "decomposition fails validation:\n{report}"
        )))
    }
}

fn cmd_validate(decomp: &Path, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let d: SymbolDecomposition = load_json(decomp)?;
    let report = d.validate(&ValidateConfig {
        seed,
        ..ValidateConfig::default()
    });
    let e = d.exponents();
    println!("{report}");
    println!("mu0 = {}", e.mu0);
    println!("mu_inf = {}", e.mu_inf);
    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure::Input(format!("cannot serialize report: {e}")))?;
        write_out(dir, "validate_report.json", &(json + "\n"))?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verdict(
            "validation failed (see report above)".into(),
        ))
    }
}

fn cmd_phi_curve(
    decomp: &Path,
    tmin: f64,
    tmax: f64,
    points: usize,
    out: &Path,
    seed: u64,
    qspec: &QuadratureSpec,
) -> Result<(), Failure> {
    if !(tmin > 0.0) || !(tmax > tmin) || points < 2 {
        return Err(Failure::Input(format!(
            "need 0 < tmin < tmax and at least two points, got {tmin}, {tmax}, {points}"
        )));
    }
    let d: SymbolDecomposition = load_json(decomp)?;
    validated(&d, seed)?;
    let e = d.exponents();

    let mut csv = String::from("t,phi,t_pow_mu0_phi,t_pow_muinf_phi,est_error\n");
    for t in logspace(tmin, tmax, points) {
        let s = if t < 1.0 {
            phi_rescaled_small(&d, t, qspec)?
        } else {
            phi_rescaled_large(&d, t, qspec)?
        };
        csv.push_str(&format!(
            "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.phi,
            t.powf(e.mu0) * s.phi,
            t.powf(e.mu_inf) * s.phi,
            s.est_error
        ));
    }
    let path = write_out(out, "phi_curve.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_perturb(
    decomp: &Path,
    perturb: &Path,
    out: &Path,
    seed: u64,
    qspec: &QuadratureSpec,
) -> Result<(), Failure> {
    let d: SymbolDecomposition = load_json(decomp)?;
    let r: Perturbation = load_json(perturb)?;
    validated(&d, seed)?;

    let probe = subhomogeneity_probe(&d, &r, &ProbeConfig::default())?;
    let mut csv = String::from("t,s_of_t\n");
    for (t, s) in probe.ts.iter().zip(&probe.values) {
        csv.push_str(&format!("{t:.16e},{s:.16e}\n"));
    }
    csv.push_str(&format!(
        "# verdict: {} ({})\n",
        probe.verdict, probe.detail
    ));
    let path = write_out(out, "probe_trace.csv", &csv)?;
    println!("probe verdict: {} ({})", probe.verdict, probe.detail);
    println!("wrote {}", path.display());

    match probe.verdict {
        Verdict::Pass => {
            let e = d.exponents();
            let mut csv = String::from("t,scaled,est_error\n");
            for t in [10.0, 100.0, 1000.0] {
                let s = perturbed_kernel_rescaled_large(&d, &r, t, qspec)?;
                println!(
                    "t^({}) * perturbed kernel at origin, t = {t}: {:.7}",
                    e.mu_inf, s.scaled
                );
                csv.push_str(&format!(
                    "{t:.16e},{:.16e},{:.16e}\n",
                    s.scaled, s.est_error
                ));
            }
            let path = write_out(out, "large_t.csv", &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Verdict::Fail => Err(Failure::Verdict(format!(
            "perturbation fails the subhomogeneity probe: {}",
            probe.detail
        ))),
        Verdict::Inconclusive => Err(Failure::Verdict(format!(
            "subhomogeneity probe is inconclusive: {}",
            probe.detail
        ))),
    }
}

fn cmd_convpow(lattice: &Path, ns: &[u32], mu: f64, out: &Path) -> Result<(), Failure> {
    let f: LatticeFunction = load_json(lattice)?;
    let curve = supnorm_curve(&f, ns, mu)?;
    let mut csv = String::from("n,supnorm,scaled\n");
    for p in &curve {
        csv.push_str(&format!("{},{:.16e},{:.16e}\n", p.n, p.supnorm, p.scaled));
        println!(
            "n = {:6}: supnorm {:.6e}, n^mu * supnorm {:.6}",
            p.n, p.supnorm, p.scaled
        );
    }
    let path = write_out(out, "supnorm_curve.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_llt(
    lattice: &Path,
    decomp: &Path,
    xi0: Vec<f64>,
    alpha: Vec<f64>,
    n: u32,
    out: &Path,
    qspec: &QuadratureSpec,
) -> Result<(), Failure> {
    let f: LatticeFunction = load_json(lattice)?;
    if f.dim() != 2 {
        return Err(Failure::Input(format!(
            "grid dumps are two-dimensional only, lattice function has dim {}",
            f.dim()
        )));
    }
    let d: SymbolDecomposition = load_json(decomp)?;
    let mu = d.exponents().mu_inf;
    let spec = LltSpec::new(d, xi0, alpha, mu)?;

    // The comparison requires |fhat| to peak at exactly one point, the
    // supplied xi0.  A plateau (|fhat| constant) is rejected in the search.
    let maxima = f.max_modulus_search(64, 48)?;
    if maxima.len() != 1 {
        return Err(Failure::Verdict(format!(
            "transform modulus has {} near-maximal points; the comparison needs exactly one",
            maxima.len()
        )));
    }
    let found = &maxima[0].xi;
    let two_pi = 2.0 * std::f64::consts::PI;
    let off = found
        .iter()
        .zip(spec.xi0())
        .map(|(a, b)| {
            let d = (a - b + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
            d.abs()
        })
        .fold(0.0f64, f64::max);
    if off > 1e-4 {
        return Err(Failure::Verdict(format!(
            "transform modulus peaks at {found:?}, not at the supplied xi0 {:?}",
            spec.xi0()
        )));
    }

    let resid = expansion_residual(&f, &spec, 0.1)?;
    println!(
        "expansion residual |R|/P over shrinking shells: {:.3} -> {:.3} ({})",
        resid.shells[0].max_ratio,
        resid.shells[5].max_ratio,
        if resid.pass {
            "vanishes"
        } else {
            "does not vanish"
        }
    );
    if !resid.pass {
        return Err(Failure::Verdict(
            "log-transform residual is not subordinate to the symbol; \
             the attractor comparison is meaningless"
                .into(),
        ));
    }

    let grid = llt_grid(&f, &spec, n, qspec, None)?;
    let mut csv = String::from("x1,x2,re_phi_n,re_attractor\n");
    let mut sup_residual = 0.0f64;
    let mut origin = None;
    for (i, x) in grid.points.iter().enumerate() {
        let (c, a) = (grid.conv_values[i], grid.attractor_values[i]);
        csv.push_str(&format!("{},{},{:.16e},{:.16e}\n", x[0], x[1], c.re, a.re));
        sup_residual = sup_residual.max((c - a).norm());
        if x.iter().all(|v| *v == 0) {
            origin = Some((c, a));
        }
    }
    let path = write_out(out, "llt_grid.csv", &csv)?;

    let scale = (n as f64).powf(spec.mu_phi());
    println!(
        "window {:?} .. {:?} ({} points, {} kernel path)",
        grid.window_min,
        grid.window_max,
        grid.points.len(),
        if grid.rescaled_window_path {
            "rescaled"
        } else {
            "pointwise"
        }
    );
    println!(
        "n^mu * sup residual over the window = {:.6}",
        scale * sup_residual
    );
    if let Some((c, a)) = origin {
        println!(
            "at the origin: power {:.6e}, attractor {:.6e}, n^mu * |attractor| = {:.6}",
            c.re,
            a.re,
            scale * a.norm()
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}
