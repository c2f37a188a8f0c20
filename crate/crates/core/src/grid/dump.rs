//! Binary field dumps: one ASCII header line
//! `SPGS1 n=<n> L=<decimal> staggered=<0|1>\n` followed by `n³` little-endian
//! `f64` values in x-fastest order.

use std::io::{BufRead, Write};

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};

pub const DUMP_MAGIC: &str = "SPGS1";

pub fn write_dump<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let grid = field.grid();
    writeln!(
        out,
        "{DUMP_MAGIC} n={} L={} staggered={}",
        grid.points(),
        grid.half_width(),
        u8::from(grid.is_staggered())
    )?;
    let mut bytes = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_dump<R: BufRead>(mut input: R) -> Result<ScalarField> {
    let mut header = Vec::new();
    input.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    header.pop();
    let header =
        std::str::from_utf8(&header).map_err(|_| Error::Format("header is not ASCII".into()))?;
    let grid = parse_header(header)?;

    let mut bytes = vec![0u8; 8 * grid.len()];
    input
        .read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload truncated: {e}")))?;
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ScalarField::new(grid, values)
}

fn parse_header(header: &str) -> Result<GridSpec> {
    let mut parts = header.split(' ');
    if parts.next() != Some(DUMP_MAGIC) {
        return Err(Error::Format(format!("expected magic {DUMP_MAGIC}")));
    }
    let mut field = |key: &str| -> Result<&str> {
        parts
            .next()
            .and_then(|p| p.strip_prefix(key))
            .and_then(|p| p.strip_prefix('='))
            .ok_or_else(|| Error::Format(format!("expected `{key}=` in header")))
    };
    let n: usize = field("n")?
        .parse()
        .map_err(|_| Error::Format("bad n".into()))?;
    let half_width: f64 = field("L")?
        .parse()
        .map_err(|_| Error::Format("bad L".into()))?;
    let staggered = match field("staggered")? {
        "0" => false,
        "1" => true,
        other => return Err(Error::Format(format!("bad staggered flag `{other}`"))),
    };
    if parts.next().is_some() {
        return Err(Error::Format("unexpected header fields".into()));
    }
    GridSpec::new(half_width, n, staggered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_is_bit_exact() {
        let g = GridSpec::new(12.0, 8, true).unwrap();
        let mut buf = Vec::new();
        write_dump(&ScalarField::constant(g, 1.5), &mut buf).unwrap();
        let header = b"SPGS1 n=8 L=12 staggered=1\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 8 * 512);
        assert_eq!(&buf[header.len()..header.len() + 8], &1.5f64.to_le_bytes());

        let g = GridSpec::new(2.5, 8, false).unwrap();
        let mut buf = Vec::new();
        write_dump(&ScalarField::zeros(g), &mut buf).unwrap();
        assert!(buf.starts_with(b"SPGS1 n=8 L=2.5 staggered=0\n"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_dump(&b"SPGS2 n=8 L=1 staggered=1\n"[..]).is_err());
        assert!(read_dump(&b"SPGS1 n=8 L=1 staggered=1\n\0\0"[..]).is_err());
        assert!(read_dump(&b"SPGS1 n=8 L=1 staggered=2\n"[..]).is_err());
        let g = GridSpec::new(1.0, 8, true).unwrap();
        let mut buf = Vec::new();
        write_dump(&ScalarField::zeros(g), &mut buf).unwrap();
        buf.push(0);
        assert!(read_dump(&buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn dump_round_trip(
            half_width in 0.1f64..50.0,
            n in 8usize..11,
            staggered: bool,
            seed in proptest::collection::vec(-1e3f64..1e3, 1..20),
        ) {
            let n = if staggered { n + n % 2 } else { n };
            let g = GridSpec::new(half_width, n, staggered).unwrap();
            let values: Vec<f64> = (0..g.len()).map(|i| seed[i % seed.len()] * (i as f64).sin()).collect();
            let field = ScalarField::new(g, values).unwrap();
            let mut buf = Vec::new();
            write_dump(&field, &mut buf).unwrap();
            let back = read_dump(&buf[..]).unwrap();
            prop_assert_eq!(back, field);
        }
    }
}
