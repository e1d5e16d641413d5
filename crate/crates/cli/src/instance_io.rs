//! The line-oriented instance file format.
//!
//! ```text
//! SCO-INSTANCE v1 <cs|qcs> <m> <n> <s>
//! <n floats>        (m rows of the matrix)
//! ...
//! <m floats>        (observations b)
//! XSTAR             (optional)
//! <n floats>        (planted signal)
//! ```
//!
//! Floats are written in shortest round-trip notation, so write-then-read
//! reproduces an instance bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use gpnp::bench::{Instance, ProblemData};
use gpnp::{CsProblem, DenseVector, ProblemKind, QcsProblem};
use nalgebra::DMatrix;

const MAGIC: &str = "SCO-INSTANCE";
const VERSION: &str = "v1";

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn err(msg: impl Into<String>) -> ParseError {
    ParseError(msg.into())
}

pub fn write_instance(inst: &Instance) -> String {
    let (matrix, obs) = match &inst.problem {
        ProblemData::Cs(p) => (p.matrix(), p.observations()),
        ProblemData::Qcs(p) => (p.measurement_rows(), p.observations()),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {}",
        inst.kind.as_str(),
        inst.m,
        inst.n,
        inst.s
    );
    for i in 0..inst.m {
        let row: Vec<String> = (0..inst.n).map(|j| matrix[(i, j)].to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let b: Vec<String> = obs.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "{}", b.join(" "));
    let _ = writeln!(out, "XSTAR");
    let xs: Vec<String> = inst.x_star.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "{}", xs.join(" "));
    out
}

pub fn write_instance_to(path: &Path, inst: &Instance) -> std::io::Result<()> {
    std::fs::write(path, write_instance(inst))
}

fn parse_floats(line: &str, expected: usize, what: &str, lineno: usize) -> Result<Vec<f64>, ParseError> {
    let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
    let values =
        values.map_err(|e| err(format!("line {lineno}: unparsable number in {what}: {e}")))?;
    if values.len() != expected {
        return Err(err(format!(
            "line {lineno}: {what} has {} entries, expected {expected}",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(err(format!("line {lineno}: non-finite entry {bad} in {what}")));
    }
    Ok(values)
}

/// Parses the instance format. The planted signal block is optional; the
/// returned instance carries a zero signal when it is absent (callers check
/// `has_x_star`).
pub fn read_instance(text: &str) -> Result<(Instance, bool), ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err("empty instance file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != MAGIC || tokens[1] != VERSION {
        return Err(err(format!(
            "header must be '{MAGIC} {VERSION} <cs|qcs> <m> <n> <s>', got '{header}'"
        )));
    }
    let kind: ProblemKind = tokens[2]
        .parse()
        .map_err(|e| err(format!("header kind field: {e}")))?;
    let parse_dim = |tok: &str, name: &str| -> Result<usize, ParseError> {
        tok.parse::<usize>()
            .map_err(|_| err(format!("header {name} field '{tok}' is not a non-negative integer")))
    };
    let m = parse_dim(tokens[3], "m")?;
    let n = parse_dim(tokens[4], "n")?;
    let s = parse_dim(tokens[5], "s")?;
    if m == 0 || n == 0 {
        return Err(err("header dimensions m and n must be at least 1"));
    }
    if s == 0 || s > n {
        return Err(err(format!("header sparsity s = {s} out of range 1..={n}")));
    }

    let mut matrix = DMatrix::<f64>::zeros(m, n);
    for i in 0..m {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| err(format!("matrix row {} missing: expected {m} rows", i + 1)))?;
        let row = parse_floats(line, n, &format!("matrix row {}", i + 1), lineno + 1)?;
        for (j, v) in row.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    let (lineno, line) = lines
        .next()
        .ok_or_else(|| err("observation line missing after matrix rows"))?;
    let b = parse_floats(line, m, "observation vector", lineno + 1)?;
    let b = DenseVector::from_vec(b);

    let mut x_star = DenseVector::zeros(n);
    let mut has_x_star = false;
    if let Some((lineno, line)) = lines.next() {
        if line.trim() != "XSTAR" {
            return Err(err(format!(
                "line {}: expected 'XSTAR' or end of file, got '{}'",
                lineno + 1,
                line.trim()
            )));
        }
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| err("XSTAR declared but signal line missing"))?;
        x_star = DenseVector::from_vec(parse_floats(line, n, "planted signal", lineno + 1)?);
        has_x_star = true;
    }
    if let Some((lineno, line)) = lines.next() {
        return Err(err(format!(
            "line {}: unexpected trailing content '{}'",
            lineno + 1,
            line.trim()
        )));
    }

    let problem = match kind {
        ProblemKind::Cs => ProblemData::Cs(
            CsProblem::new(matrix, b).map_err(|e| err(format!("invalid problem data: {e}")))?,
        ),
        ProblemKind::Qcs => ProblemData::Qcs(
            QcsProblem::new(matrix, b).map_err(|e| err(format!("invalid problem data: {e}")))?,
        ),
    };
    Ok((
        Instance {
            kind,
            problem,
            x_star,
            seed: 0,
            m,
            n,
            s,
        },
        has_x_star,
    ))
}

pub fn read_instance_from(path: &Path) -> Result<(Instance, bool), ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    read_instance(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gpnp::bench::{gen_gaussian_instance, gen_qcs_instance};

    #[test]
    fn round_trip_is_bit_exact() {
        for inst in [
            gen_gaussian_instance(6, 17, 3, 42),
            gen_qcs_instance(5, 9, 2, 7),
        ] {
            let text = write_instance(&inst);
            let (back, has_xstar) = read_instance(&text).unwrap();
            assert!(has_xstar);
            assert_eq!(back.kind, inst.kind);
            // Seeds are not serialized; compare content.
            let h1 = {
                let mut i = inst.clone();
                i.seed = 0;
                i.content_hash()
            };
            assert_eq!(back.content_hash(), h1);
            // And the re-written text is identical.
            assert_eq!(write_instance(&back), text);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported_with_context() {
        let inst = gen_gaussian_instance(2, 3, 1, 1);
        let text = write_instance(&inst);
        // Declare m=2 but provide an extra matrix row.
        let mut lines: Vec<&str> = text.lines().collect();
        let extra = lines[1].to_string();
        lines.insert(2, &extra);
        let broken = lines.join("\n");
        let e = read_instance(&broken).unwrap_err();
        assert!(e.0.contains("observation vector"), "{}", e.0);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let inst = gen_gaussian_instance(2, 3, 1, 1);
        let text = write_instance(&inst).replace(' ', " ").replacen(
            &inst.cs().unwrap().matrix()[(0, 0)].to_string(),
            "NaN",
            1,
        );
        let e = read_instance(&text).unwrap_err();
        assert!(e.0.contains("non-finite"), "{}", e.0);
    }

    #[test]
    fn bad_headers_are_rejected() {
        assert!(read_instance("").is_err());
        assert!(read_instance("NOPE v1 cs 2 3 1").is_err());
        assert!(read_instance("SCO-INSTANCE v1 cs 2 3 9").is_err());
        assert!(read_instance("SCO-INSTANCE v1 maybe 2 3 1").is_err());
    }
}
