use std::path::PathBuf;

use clap::{Args, Subcommand};
use hsstab::characters::{
    clock_shift_twisted, heisenberg_word_trace_twisted, induced_central_trace, mix_traces,
    parse_rational, tensor_power_delta, verify_induced_trace, with_trivial_summand,
    CentralCharacterSpec, ExactComplex, FiniteGroup, GroupFile,
};
use hsstab::linalg::{identity, unitarity_residual};
use hsstab::presentation::{preset_heisenberg, TupleFile, UnitaryTuple};
use hsstab::{BigRational, Complex64};
use serde::Serialize;
use serde_json::json;

use crate::output::{read_json, write_json, Failure, Outcome};

#[derive(Subcommand)]
pub enum CharCommand {
    /// Clock-and-shift pair and traces of words U^a V^b Z^c.
    ClockShift(ClockShiftArgs),
    /// Least tensor power pushing traces below eps.
    DeltaE(DeltaArgs),
    /// Trace of the representation induced from a central character.
    Induce(InduceArgs),
    /// Rational convex combination of trace vectors.
    Mix(MixArgs),
}

#[derive(Args)]
pub struct ClockShiftArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: i64,
    #[arg(long)]
    q: usize,
    /// `U^q = e^{i·alpha}`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_phase: f64,
    /// `V^q = e^{i·beta}`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_phase: f64,
    /// Words `a,b,c`; repeat the flag for more.
    #[arg(long = "word", allow_hyphen_values = true)]
    words: Vec<String>,
    /// Write the pair as a tuple file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DeltaArgs {
    /// Trace values `x` or `x+yi`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Vec<String>,
    /// Use the faithful character of Z_n plus the trivial one instead of
    /// `--values`.
    #[arg(long, conflicts_with = "values")]
    cyclic: Option<usize>,
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
pub struct InduceArgs {
    /// Group file: `{"generators": [[…], …]}` or `{"table": [[…], …]}`.
    #[arg(long, conflicts_with_all = ["cyclic", "dihedral"])]
    group: Option<PathBuf>,
    #[arg(long, conflicts_with = "dihedral")]
    cyclic: Option<usize>,
    /// Dihedral group of order 2n.
    #[arg(long)]
    dihedral: Option<usize>,
    /// Central element generating the subgroup.
    #[arg(long, default_value_t = 0)]
    z: usize,
    /// `χ(z^j) = e^{2πi·j·l/ord z}`.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    l: i64,
    /// Also build the monomial induced representation and compare traces.
    #[arg(long)]
    verify: bool,
    /// Character table CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MixArgs {
    #[arg(long, value_delimiter = ',')]
    dims: Vec<u64>,
    /// Rational weights `p/q`, comma separated.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<String>,
    /// One trace vector per representation, separated by `;`, entries by
    /// `,`; each entry `p/q` or `p/q+r/si`.
    #[arg(long, allow_hyphen_values = true)]
    traces: String,
}

pub fn run(cmd: CharCommand) -> Result<Outcome, Failure> {
    match cmd {
        CharCommand::ClockShift(a) => clock_shift(a),
        CharCommand::DeltaE(a) => delta(a),
        CharCommand::Induce(a) => induce(a),
        CharCommand::Mix(a) => mix(a),
    }
}

/// Splits `x`, `yi` or `x±yi` into real and imaginary text.
fn split_complex(s: &str) -> (&str, &str) {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return (s, "0");
    };
    let bytes = body.as_bytes();
    let cut = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match cut {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", if body.is_empty() { "1" } else { body }),
    }
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let (re, im) = split_complex(s);
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x.trim_start_matches('+'),
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Failure::config(format!("`{s}` is not a complex number")))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

fn parse_exact(s: &str) -> Result<ExactComplex, Failure> {
    let (re, im) = split_complex(s);
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x.trim_start_matches('+'),
    };
    Ok(ExactComplex::new(parse_rational(re)?, parse_rational(im)?))
}

fn clock_shift(a: ClockShiftArgs) -> Result<Outcome, Failure> {
    let alpha = Complex64::from_polar(1.0, a.alpha_phase);
    let beta = Complex64::from_polar(1.0, a.beta_phase);
    let (u, v) = clock_shift_twisted(a.p, a.q, alpha, beta)?;
    let z = &u * &v * u.adjoint() * v.adjoint();
    let omega = Complex64::from_polar(1.0, std::f64::consts::TAU * a.p as f64 / a.q as f64);
    let residual = (z - identity(a.q) * omega).norm();
    let mut traces = Vec::new();
    for w in &a.words {
        let abc: Vec<i64> = w
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::config(format!("word `{w}` is not a,b,c")))?;
        let [x, y, c] = abc[..] else {
            return Err(Failure::config(format!("word `{w}` is not a,b,c")));
        };
        let t = heisenberg_word_trace_twisted(x, y, c, a.p, a.q, alpha, beta)?;
        traces.push(json!({"a": x, "b": y, "c": c, "trace": [t.re, t.im]}));
    }
    println!(
        "{}",
        json!({
            "p": a.p,
            "q": a.q,
            "commutator_residual": residual,
            "unitarity_residual": unitarity_residual(&u).max(unitarity_residual(&v)),
            "traces": traces,
        })
    );
    if let Some(out) = &a.out {
        let t = UnitaryTuple::new(vec![u, v], 1e-12)?;
        write_json(Some(out), &TupleFile::new(Some(&preset_heisenberg()), &t))?;
    }
    Ok(Outcome::Success)
}

fn delta(a: DeltaArgs) -> Result<Outcome, Failure> {
    let values = match a.cyclic {
        Some(n) if n >= 2 => {
            let chi: Vec<Complex64> = (1..n)
                .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64))
                .collect();
            with_trivial_summand(&chi, 1)
        }
        Some(_) => return Err(Failure::config("--cyclic needs n ≥ 2")),
        None => a
            .values
            .iter()
            .map(|s| parse_complex(s))
            .collect::<Result<_, _>>()?,
    };
    let d = tensor_power_delta(&values, a.eps)?;
    println!("{}", serde_json::to_string(&d).map_err(Failure::config)?);
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct TableRow {
    element: usize,
    re: f64,
    im: f64,
}

fn induce(a: InduceArgs) -> Result<Outcome, Failure> {
    let g = match (&a.group, a.cyclic, a.dihedral) {
        (Some(path), _, _) => read_json::<GroupFile>(path)?.build()?,
        (None, Some(n), _) => FiniteGroup::cyclic(n)?,
        (None, None, Some(n)) => FiniteGroup::dihedral(n)?,
        _ => {
            return Err(Failure::config(
                "one of --group, --cyclic, --dihedral is required",
            ))
        }
    };
    let spec = CentralCharacterSpec::cyclic(&g, a.z, a.l)?;
    let mut w = csv::Writer::from_writer(match &a.out {
        Some(p) => {
            Box::new(std::fs::File::create(p).map_err(Failure::config)?) as Box<dyn std::io::Write>
        }
        None => Box::new(std::io::stdout().lock()),
    });
    for x in 0..g.order() {
        let t = induced_central_trace(&g, &spec, x)?;
        w.serialize(TableRow {
            element: x,
            re: t.re,
            im: t.im,
        })
        .map_err(Failure::config)?;
    }
    w.flush().map_err(Failure::config)?;
    if a.verify {
        let gap = verify_induced_trace(&g, &spec)?;
        eprintln!("monomial trace gap {gap:.3e}");
        if gap > 1e-12 {
            return Ok(Outcome::InvariantFailure);
        }
    }
    Ok(Outcome::Success)
}

fn mix(a: MixArgs) -> Result<Outcome, Failure> {
    let weights: Vec<BigRational> = a
        .weights
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<_, _>>()?;
    let traces: Vec<Vec<ExactComplex>> = a
        .traces
        .split(';')
        .map(|rep| {
            if rep.trim().is_empty() {
                return Ok(Vec::new());
            }
            rep.split(',').map(parse_exact).collect()
        })
        .collect::<Result<_, _>>()?;
    let m = mix_traces(&a.dims, &weights, &traces)?;
    let exact = m.block_traces(&a.dims, &traces) == m.traces;
    let show = |z: &ExactComplex| [z.re.to_string(), z.im.to_string()];
    println!(
        "{}",
        json!({
            "total_dim": m.total_dim.to_string(),
            "multiplicities": m.multiplicities.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
            "traces": m.traces.iter().map(show).collect::<Vec<_>>(),
            "block_sum_matches": exact,
        })
    );
    Ok(if exact {
        Outcome::Success
    } else {
        Outcome::InvariantFailure
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_text() {
        let c = |s| parse_complex(s).ok().unwrap();
        assert_eq!(c("0.5"), Complex64::new(0.5, 0.0));
        assert_eq!(c("-0.5+0.25i"), Complex64::new(-0.5, 0.25));
        assert_eq!(c("1e-3-2i"), Complex64::new(1e-3, -2.0));
        assert_eq!(c("i"), Complex64::new(0.0, 1.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("3-i"), Complex64::new(3.0, -1.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn exact_text() {
        let e = |s| parse_exact(s).ok().unwrap();
        let q = |s| parse_rational(s).unwrap();
        assert_eq!(e("1/2"), ExactComplex::new(q("1/2"), q("0")));
        assert_eq!(e("-1/2+1/3i"), ExactComplex::new(q("-1/2"), q("1/3")));
        assert_eq!(e("-2/3i"), ExactComplex::new(q("0"), q("-2/3")));
    }
}
