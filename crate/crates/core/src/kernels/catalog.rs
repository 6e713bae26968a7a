//! Parsing of the short spec strings used in scenario files, e.g.
//! `exp(0.5,1)`, `power(0.4,2)`, `damp-cubic(0.5)`, `rational(1,0.5)`.

use crate::error::{Error, Result};
use crate::kernels::damping::DampingLaw;
use crate::kernels::modulus::ConvexModulus;
use crate::kernels::relaxation::{KernelFamily, RelaxationKernel};
use crate::kernels::xi::XiWeight;

/// Splits `name(a,b,...)` into the name and its trimmed arguments. A bare
/// word has no arguments.
pub fn parse_call(spec: &str) -> Result<(String, Vec<String>)> {
    let s = spec.trim();
    let Some(open) = s.find('(') else {
        if s.is_empty() {
            return Err(Error::input("empty spec string"));
        }
        return Ok((s.to_owned(), Vec::new()));
    };
    if !s.ends_with(')') {
        return Err(Error::input(format!("unbalanced parentheses in `{s}`")));
    }
    let name = s[..open].trim().to_owned();
    let body = &s[open + 1..s.len() - 1];
    let args = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',').map(|a| a.trim().to_owned()).collect()
    };
    Ok((name, args))
}

fn numbers(spec: &str, args: &[String], expected: usize) -> Result<Vec<f64>> {
    if args.len() != expected {
        return Err(Error::input(format!(
            "`{spec}` takes {expected} argument(s), got {}",
            args.len()
        )));
    }
    args.iter()
        .map(|a| {
            a.parse::<f64>()
                .map_err(|_| Error::input(format!("`{a}` in `{spec}` is not a number")))
        })
        .collect()
}

/// Parses `t:v` pairs from a table body.
fn table(spec: &str, args: &[String]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::with_capacity(args.len());
    let mut values = Vec::with_capacity(args.len());
    for pair in args {
        let (t, v) = pair
            .split_once(':')
            .ok_or_else(|| Error::input(format!("table entry `{pair}` in `{spec}` is not `t:v`")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("`{x}` in `{spec}` is not a number")))
        };
        times.push(parse(t)?);
        values.push(parse(v)?);
    }
    Ok((times, values))
}

/// `exp(b0,a)`, `power(b0,q)`, `table(t:v,...)` or `none`.
pub fn parse_kernel(spec: &str) -> Result<RelaxationKernel> {
    let (name, args) = parse_call(spec)?;
    match name.as_str() {
        "none" if args.is_empty() => Ok(RelaxationKernel::zero()),
        "exp" => {
            let p = numbers(spec, &args, 2)?;
            RelaxationKernel::exponential(p[0], p[1])
        }
        "power" => {
            let p = numbers(spec, &args, 2)?;
            RelaxationKernel::power(p[0], p[1])
        }
        "table" => {
            let (t, v) = table(spec, &args)?;
            RelaxationKernel::tabulated(t, v)
        }
        _ => Err(Error::input(format!(
            "unknown kernel `{spec}` (expected exp(b0,a), power(b0,q), table(t:v,...) or none)"
        ))),
    }
}

/// `damp-linear(c)`, `damp-cubic(eps)`, `damp-power(p,eps)` or `none`.
pub fn parse_damping(spec: &str) -> Result<DampingLaw> {
    let (name, args) = parse_call(spec)?;
    match name.as_str() {
        "none" if args.is_empty() => Ok(DampingLaw::none()),
        "damp-linear" => DampingLaw::linear(numbers(spec, &args, 1)?[0]),
        "damp-cubic" => DampingLaw::cubic(numbers(spec, &args, 1)?[0]),
        "damp-power" => {
            let p = numbers(spec, &args, 2)?;
            DampingLaw::origin_power(p[0], p[1])
        }
        _ => Err(Error::input(format!(
            "unknown damping `{spec}` (expected damp-linear(c), damp-cubic(eps), damp-power(p,eps) or none)"
        ))),
    }
}

/// `const(x)`, `rational(s,θ)`, `table(t:v,...)` or `auto`. Returns `None`
/// for `auto` on the zero kernel.
pub fn parse_xi(spec: &str, kernel: &RelaxationKernel) -> Result<Option<XiWeight>> {
    let (name, args) = parse_call(spec)?;
    match name.as_str() {
        "auto" if args.is_empty() => Ok(auto_decay_law(kernel)?.map(|(xi, _)| xi)),
        "const" => XiWeight::constant(numbers(spec, &args, 1)?[0]).map(Some),
        "rational" => {
            let p = numbers(spec, &args, 2)?;
            XiWeight::rational(p[0], p[1]).map(Some)
        }
        "table" => {
            let (t, v) = table(spec, &args)?;
            XiWeight::tabulated(t, v).map(Some)
        }
        _ => Err(Error::input(format!(
            "unknown xi `{spec}` (expected const(x), rational(s,θ), table(t:v,...) or auto)"
        ))),
    }
}

/// `linear(α)`, `power(coef,p,r1)` or `auto`. Returns `None` for `auto` on
/// the zero kernel.
pub fn parse_modulus(spec: &str, kernel: &RelaxationKernel) -> Result<Option<ConvexModulus>> {
    let (name, args) = parse_call(spec)?;
    match name.as_str() {
        "auto" if args.is_empty() => Ok(auto_decay_law(kernel)?.map(|(_, b)| b)),
        "linear" => ConvexModulus::linear(numbers(spec, &args, 1)?[0]).map(Some),
        "power" => {
            let p = numbers(spec, &args, 3)?;
            ConvexModulus::power(p[0], p[1], p[2]).map(Some)
        }
        _ => Err(Error::input(format!(
            "unknown modulus `{spec}` (expected linear(α), power(coef,p,r1) or auto)"
        ))),
    }
}

/// Sharp decay law `b' = -ξ B(b)` for the closed-form families:
/// `ξ ≡ a, B(s) = s` for `b₀e^{-at}` and
/// `ξ ≡ q b₀^{-1/q}, B(s) = s^{(q+1)/q}` on `(0, b₀]` for `b₀(1+t)^{-q}`.
pub fn auto_decay_law(kernel: &RelaxationKernel) -> Result<Option<(XiWeight, ConvexModulus)>> {
    match kernel.family() {
        KernelFamily::Zero => Ok(None),
        KernelFamily::Exponential { rate, .. } => Ok(Some((XiWeight::constant(*rate)?, ConvexModulus::linear(1.0)?))),
        KernelFamily::Power { b0, exponent } => {
            let q = *exponent;
            Ok(Some((
                XiWeight::constant(q * b0.powf(-1.0 / q))?,
                ConvexModulus::power(1.0, (q + 1.0) / q, *b0)?,
            )))
        }
        _ => Err(Error::input(format!(
            "no automatic decay law for kernel {}; give xi and modulus explicitly",
            kernel.describe()
        ))),
    }
}
