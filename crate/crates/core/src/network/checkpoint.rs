//! Plain-text parameter checkpoints.
//!
//! Layout, one comma-separated record per line:
//!
//! ```text
//! tagproj-params,1
//! dims,<input_dim>,<h1>,<h2>,<output_dim>
//! w1,<h1*input_dim values, row-major>
//! b1,<h1 values>
//! w2,<h2*h1 values, row-major>
//! b2,<h2 values>
//! w3,<output_dim*h2 values, row-major>
//! b3,<output_dim values>
//! ```
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` bit-exactly.

use std::io::{BufRead, Write};

use super::{Dense, NetworkParams, NetworkSpec};
use crate::error::{Error, Result};
use crate::representation::format_real;

const MAGIC: &str = "tagproj-params";
const VERSION: &str = "1";

pub fn write<W: Write>(params: &NetworkParams, mut out: W) -> Result<()> {
    let s = params.spec();
    writeln!(out, "{MAGIC},{VERSION}")?;
    writeln!(out, "dims,{},{},{},{}", s.input_dim, s.h1, s.h2, s.output_dim)?;
    for (i, layer) in params.layers().iter().enumerate() {
        write_record(&mut out, &format!("w{}", i + 1), layer.weights())?;
        write_record(&mut out, &format!("b{}", i + 1), layer.bias())?;
    }
    out.flush()?;
    Ok(())
}

fn write_record<W: Write>(out: &mut W, key: &str, values: &[f64]) -> Result<()> {
    write!(out, "{key}")?;
    for v in values {
        write!(out, ",{}", format_real(*v))?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn read<R: BufRead>(input: R) -> Result<NetworkParams> {
    let mut lines = input.lines().enumerate();
    let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
        let (i, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of checkpoint, expected {expect}"),
        })?;
        let line = line?;
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields[0] != expect {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected record {expect:?}, found {:?}", fields[0]),
            });
        }
        Ok((i + 1, fields[1..].to_vec()))
    };

    let (line, header) = next(MAGIC)?;
    if header != [VERSION] {
        return Err(Error::Parse {
            line,
            message: format!("unsupported checkpoint version {header:?}"),
        });
    }
    let (line, dims) = next("dims")?;
    let dims = parse_all::<usize>(&dims, line)?;
    if dims.len() != 4 {
        return Err(Error::Parse {
            line,
            message: format!("expected 4 dimensions, found {}", dims.len()),
        });
    }
    let spec = NetworkSpec::new(dims[0], dims[1], dims[2], dims[3])?;
    let mut layers = Vec::with_capacity(3);
    for (i, (rows, cols)) in spec.layer_shapes().into_iter().enumerate() {
        let (wl, w) = next(&format!("w{}", i + 1))?;
        let (bl, b) = next(&format!("b{}", i + 1))?;
        let w = parse_all::<f64>(&w, wl)?;
        let b = parse_all::<f64>(&b, bl)?;
        layers.push(Dense::from_parts(rows, cols, w, b)?);
    }
    let layers: [Dense; 3] = layers.try_into().expect("three layers");
    NetworkParams::from_layers(spec, layers)
}

fn parse_all<T: std::str::FromStr>(fields: &[String], line: usize) -> Result<Vec<T>> {
    fields
        .iter()
        .map(|f| {
            f.trim().parse::<T>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number {f:?}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_params;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trips_bit_exactly(p in 1usize..6, h1 in 1usize..6, h2 in 1usize..6, o in 1usize..5, seed: u64, scale in -1e3f64..1e3) {
            let mut params = init_params(NetworkSpec::new(p, h1, h2, o).unwrap(), seed);
            for (i, v) in params.values_mut().enumerate() {
                *v *= scale + i as f64 * 1e-7;
            }
            let mut buf = Vec::new();
            write(&params, &mut buf).unwrap();
            let back = read(&buf[..]).unwrap();
            prop_assert_eq!(back.spec(), params.spec());
            for (a, b) in back.values().zip(params.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_truncated_and_misshapen() {
        let params = init_params(NetworkSpec::new(2, 3, 2, 2).unwrap(), 1);
        let mut buf = Vec::new();
        write(&params, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(read(truncated.as_bytes()).is_err());
        let bad = text.replacen("dims,2,3,2,2", "dims,2,3,2,3", 1);
        assert!(read(bad.as_bytes()).is_err());
    }
}
