//! Instance files: CSV with header `k,a_sd,a_sr,a_rd,w`, one row per
//! subcarrier, `k` running 1..=M in order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    k: usize,
    a_sd: f64,
    a_sr: f64,
    a_rd: f64,
    w: f64,
}

pub fn read_instance<R: Read>(input: R) -> Result<ChannelRealization> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| csv_err(e, 1))?.clone();
    let expected = ["k", "a_sd", "a_sr", "a_rd", "w"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header must be `{}`", expected.join(",")),
        });
    }

    let (mut a_sd, mut a_sr, mut a_rd, mut w) = (vec![], vec![], vec![], vec![]);
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = rec.map_err(|e| csv_err(e, line))?;
        if row.k != i + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected k = {}, found {}", i + 1, row.k),
            });
        }
        a_sd.push(row.a_sd);
        a_sr.push(row.a_sr);
        a_rd.push(row.a_rd);
        w.push(row.w);
    }
    if w.is_empty() {
        return Err(Error::Parse { line: 2, msg: "no subcarriers".into() });
    }
    ChannelRealization::new(a_sd, a_sr, a_rd, w)
}

pub fn write_instance<W: Write>(real: &ChannelRealization, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for k in 0..real.m() {
        wtr.serialize(Row {
            k: k + 1,
            a_sd: real.a_sd[k],
            a_sr: real.a_sr[k],
            a_rd: real.a_rd[k],
            w: real.w[k],
        })
        .map_err(|e| csv_err(e, k + 2))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<ChannelRealization> {
    read_instance(std::fs::File::open(path)?)
}

pub fn save_instance(real: &ChannelRealization, path: &Path) -> Result<()> {
    write_instance(real, std::fs::File::create(path)?)
}

fn csv_err(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, RicianConfig};

    #[test]
    fn round_trip_is_exact() {
        let real = sample_realization(&RicianConfig::new(3.0, 1.0, 3.0, 7), 11).unwrap();
        let mut buf = Vec::new();
        write_instance(&real, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,a_sd,a_sr,a_rd,w\n1,"));
        assert_eq!(read_instance(buf.as_slice()).unwrap(), real);
    }

    #[test]
    fn parses_hand_written_file() {
        let text = "k, a_sd, a_sr, a_rd, w\n1, 1.0, 3, 3, 1\n2, 0.5, 2.5, 4, 1.5\n";
        let real = read_instance(text.as_bytes()).unwrap();
        assert_eq!(real.a_sd, vec![1.0, 0.5]);
        assert_eq!(real.a_rd, vec![3.0, 4.0]);
        assert_eq!(real.w, vec![1.0, 1.5]);
    }

    #[test]
    fn rejects_bad_files() {
        let bad_header = "k,a_sr,a_sd,a_rd,w\n1,1,1,1,1\n";
        assert!(matches!(read_instance(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));

        let out_of_order = "k,a_sd,a_sr,a_rd,w\n2,1,1,1,1\n";
        assert!(matches!(read_instance(out_of_order.as_bytes()), Err(Error::Parse { line: 2, .. })));

        let not_a_number = "k,a_sd,a_sr,a_rd,w\n1,1,1,1,1\n2,x,1,1,1\n";
        assert!(matches!(read_instance(not_a_number.as_bytes()), Err(Error::Parse { line: 3, .. })));

        let negative = "k,a_sd,a_sr,a_rd,w\n1,-1,1,1,1\n";
        assert!(matches!(read_instance(negative.as_bytes()), Err(Error::Realization(_))));

        assert!(read_instance("k,a_sd,a_sr,a_rd,w\n".as_bytes()).is_err());
    }
}
