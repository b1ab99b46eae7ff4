use num_complex::Complex64;

use super::{PolynomialVector, SymbolSpec};
use crate::error::{Error, Result};

fn parse_error(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn parse_real(text: &str, whole: &str) -> Result<f64> {
    let value: f64 = text
        .parse()
        .map_err(|_| parse_error(whole, format!("{text:?} is not a number")))?;
    if !value.is_finite() {
        return Err(parse_error(whole, format!("{text:?} is not finite")));
    }
    Ok(value)
}

/// Parses a complex literal `x+yi`. Either part may be omitted: `0.5`,
/// `-0.6i`, `i` and `1e-3-2e-1i` are all accepted.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(parse_error(text, "empty complex literal"));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(&s, text)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(p) => (&body[..p], &body[p..]),
        None => ("", body),
    };
    let re = if re_text.is_empty() {
        0.0
    } else {
        parse_real(re_text, text)?
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => parse_real(t, text)?,
    };
    Ok(Complex64::new(re, im))
}

/// Parses `const:c`, `poly:c0,c1,...` or `blaschke:a1;a2;...[|u]`, where `u`
/// is the unimodular factor (default 1), and validates the result.
pub fn parse_symbol(text: &str) -> Result<SymbolSpec> {
    let trimmed = text.trim();
    let (kind, body) = trimmed
        .split_once(':')
        .ok_or_else(|| parse_error(text, "expected `const:`, `poly:` or `blaschke:` prefix"))?;
    let symbol = match kind {
        "const" => SymbolSpec::Constant(parse_complex(body)?),
        "poly" => {
            let coeffs = body
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()?;
            SymbolSpec::Polynomial(PolynomialVector::new(coeffs))
        }
        "blaschke" => {
            let (zeros_text, factor) = match body.split_once('|') {
                Some((z, u)) => (z, parse_complex(u)?),
                None => (body, Complex64::new(1.0, 0.0)),
            };
            if zeros_text.trim().is_empty() {
                return Err(parse_error(text, "a Blaschke product needs at least one zero"));
            }
            let zeros = zeros_text
                .split(';')
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()?;
            SymbolSpec::Blaschke {
                zeros,
                unimodular_factor: factor,
            }
        }
        other => return Err(parse_error(text, format!("unknown symbol kind {other:?}"))),
    };
    symbol.validate()?;
    Ok(symbol)
}
