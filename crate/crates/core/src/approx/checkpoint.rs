//! Plain-text network checkpoints.
//!
//! ```text
//! mpcrl-mlp 1
//! layers 3 64 64 1
//! output identity            # or: output tanh <scale_1> ... <scale_k>
//! params 4481
//! <one parameter per line, row-major weights then biases, layer by layer>
//! ```
//!
//! Values use the shortest representation that round-trips exactly.

use std::io::{BufRead, Write};

use super::{Mlp, OutputActivation};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "mpcrl-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_mlp<W: Write>(out: &mut W, net: &Mlp) -> std::io::Result<()> {
    writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}")?;
    let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "layers {}", sizes.join(" "))?;
    match net.output_activation() {
        OutputActivation::Identity => writeln!(out, "output identity")?,
        OutputActivation::Tanh { scale } => {
            let s: Vec<String> = scale.iter().map(|v| v.to_string()).collect();
            writeln!(out, "output tanh {}", s.join(" "))?
        }
    }
    writeln!(out, "params {}", net.params().len())?;
    for p in net.params() {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

fn next_line<R: BufRead>(input: &mut R, buf: &mut String) -> Result<()> {
    buf.clear();
    let n = input
        .read_line(buf)
        .map_err(|e| Error::Checkpoint(format!("read failed: {e}")))?;
    if n == 0 {
        return Err(Error::Checkpoint("unexpected end of file".into()));
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("not a number: {s:?}")))
}

pub fn read_mlp<R: BufRead>(input: &mut R) -> Result<Mlp> {
    let mut line = String::new();
    next_line(input, &mut line)?;
    let mut header = line.split_whitespace();
    if header.next() != Some(CHECKPOINT_MAGIC) {
        return Err(Error::Checkpoint(format!("bad magic line {:?}", line.trim())));
    }
    match header.next().map(str::parse::<u32>) {
        Some(Ok(CHECKPOINT_VERSION)) => {}
        other => return Err(Error::Checkpoint(format!("unsupported version {other:?}"))),
    }

    next_line(input, &mut line)?;
    let mut fields = line.split_whitespace();
    if fields.next() != Some("layers") {
        return Err(Error::Checkpoint("expected `layers`".into()));
    }
    let sizes = fields
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Checkpoint(format!("bad layer size {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    next_line(input, &mut line)?;
    let mut fields = line.split_whitespace();
    if fields.next() != Some("output") {
        return Err(Error::Checkpoint("expected `output`".into()));
    }
    let output = match fields.next() {
        Some("identity") => OutputActivation::Identity,
        Some("tanh") => OutputActivation::Tanh {
            scale: fields.map(parse_f64).collect::<Result<_>>()?,
        },
        other => return Err(Error::Checkpoint(format!("unknown output {other:?}"))),
    };

    next_line(input, &mut line)?;
    let count = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["params", n] => n
            .parse::<usize>()
            .map_err(|_| Error::Checkpoint(format!("bad parameter count {n:?}")))?,
        _ => return Err(Error::Checkpoint("expected `params`".into())),
    };
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        next_line(input, &mut line)?;
        params.push(parse_f64(line.trim())?);
    }
    Mlp::from_params(&sizes, output, params)
}
