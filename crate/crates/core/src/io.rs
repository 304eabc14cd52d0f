//! Trajectory CSV: one observation per row, `track_id,frame,x1[,x2,...]`, header optional.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, TrajectorySet};

/// Parsed file contents before frame re-indexing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTracks {
    /// Tracks in order of first appearance.
    pub tracks: Vec<(String, BTreeMap<i64, Vec<f64>>)>,
    pub dim: Option<usize>,
}

impl RawTracks {
    pub fn frame_range(&self) -> Option<(i64, i64)> {
        let frames = self.tracks.iter().flat_map(|(_, pts)| pts.keys().copied());
        frames.fold(None, |acc, f| match acc {
            None => Some((f, f)),
            Some((lo, hi)) => Some((lo.min(f), hi.max(f))),
        })
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn read_tracks<R: Read>(mut reader: R) -> Result<RawTracks> {
    let mut text = Vec::new();
    reader.read_to_end(&mut text)?;
    // Record start positions include skipped blank lines, so a record's line is taken
    // from the byte just before its end.
    let newlines: Vec<usize> = text.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i).collect();
    let line_of = |end: u64| newlines.partition_point(|&n| (n as u64) + 1 < end) + 1;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_slice());
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = RawTracks::default();
    let mut first = true;
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(parse_error(line_of(rdr.position().byte()), e.to_string())),
        }
        let line = line_of(rdr.position().byte());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let is_first = std::mem::take(&mut first);
        if record.len() < 3 {
            if is_first && record.get(1).is_some_and(|f| f.parse::<i64>().is_err()) {
                continue;
            }
            return Err(parse_error(line, format!("expected track_id,frame,x1[,...], found {} fields", record.len())));
        }
        let frame = match record[1].parse::<i64>() {
            Ok(f) => f,
            Err(_) if is_first => continue,
            Err(_) => return Err(parse_error(line, format!("frame '{}' is not an integer", &record[1]))),
        };
        let state = record
            .iter()
            .skip(2)
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_error(line, format!("coordinate '{s}' is not a finite number"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        match out.dim {
            None => out.dim = Some(state.len()),
            Some(p) if p != state.len() => {
                return Err(parse_error(line, format!("expected {p} coordinates, found {}", state.len())));
            }
            _ => {}
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(parse_error(line, "empty track id"));
        }
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            out.tracks.push((id.clone(), BTreeMap::new()));
            out.tracks.len() - 1
        });
        if out.tracks[slot].1.insert(frame, state).is_some() {
            return Err(parse_error(line, format!("track '{id}' has two rows for frame {frame}")));
        }
    }
    Ok(out)
}

/// Converts several files to trajectory sets on a common clock: the smallest frame
/// across all of them becomes frame 1 and gaps are preserved.
pub fn align(raw: &[&RawTracks]) -> Result<Vec<TrajectorySet>> {
    let dims: Vec<usize> = raw.iter().filter_map(|r| r.dim).collect();
    if let Some(w) = dims.windows(2).find(|w| w[0] != w[1]) {
        return Err(Error::DimensionMismatch { expected: w[0], found: w[1] });
    }
    let origin = raw.iter().filter_map(|r| r.frame_range()).map(|(lo, _)| lo).min().unwrap_or(1);
    raw.iter()
        .map(|r| {
            let mut trajectories = Vec::with_capacity(r.tracks.len());
            let mut labels = Vec::with_capacity(r.tracks.len());
            for (id, pts) in &r.tracks {
                let shifted = pts
                    .iter()
                    .map(|(&f, x)| {
                        let t = u32::try_from(f - origin + 1)
                            .map_err(|_| Error::invalid(format!("frame span too large at frame {f}")))?;
                        Ok((t, x.clone()))
                    })
                    .collect::<Result<BTreeMap<u32, Vec<f64>>>>()?;
                trajectories.push(Trajectory::new(shifted)?);
                labels.push(id.clone());
            }
            TrajectorySet::with_labels(trajectories, labels)
        })
        .collect()
}

/// Reads ground truth and hypothesis and puts them on a common clock.
pub fn read_pair<R1: Read, R2: Read>(gt: R1, hyp: R2) -> Result<(TrajectorySet, TrajectorySet)> {
    let (a, b) = (read_tracks(gt)?, read_tracks(hyp)?);
    let mut sets = align(&[&a, &b])?.into_iter();
    Ok((sets.next().expect("two sets"), sets.next().expect("two sets")))
}

/// Writes a header and one row per observation, tracks in order. Trajectories without
/// labels are numbered from 1. `dim` sets the header width for empty sets.
pub fn write_tracks<W: Write>(writer: W, set: &TrajectorySet, dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["track_id".to_string(), "frame".to_string()];
    header.extend((1..=set.dim().unwrap_or(dim)).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(csv_io)?;
    for (n, tr) in set.trajectories().iter().enumerate() {
        let id = set.labels().map_or_else(|| (n + 1).to_string(), |l| l[n].clone());
        for (t, x) in tr.points() {
            let mut row = vec![id.clone(), t.to_string()];
            row.extend(x.iter().map(|v| format!("{v}")));
            w.write_record(&row).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional_and_frames_are_reindexed() {
        let with = "track_id,frame,x\na,10,1.5\na,12,2.5\nb,11,0\n";
        let without = "a,10,1.5\na,12,2.5\nb,11,0\n";
        let r1 = read_tracks(with.as_bytes()).unwrap();
        let r2 = read_tracks(without.as_bytes()).unwrap();
        assert_eq!(r1, r2);
        let sets = align(&[&r1]).unwrap();
        let a = &sets[0];
        assert_eq!(a.labels().unwrap(), ["a", "b"]);
        assert_eq!(a.trajectories()[0].points().keys().copied().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(a.trajectories()[1].get(2), Some(&[0.0][..]));
    }

    #[test]
    fn pair_shares_one_origin() {
        let (a, b) = read_pair("1,5,0\n".as_bytes(), "1,7,0\n".as_bytes()).unwrap();
        assert_eq!(a.trajectories()[0].first_frame(), 1);
        assert_eq!(b.trajectories()[0].first_frame(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("id,frame,x\n1,1,0\n1,x,0\n", 3),
            ("1,1,0\n1,2,0,5\n", 2),
            ("1,1,0\n\n1,1,3\n", 3),
            ("1,1,0\n1,2,nan\n", 2),
            ("1,1,0\n2,3\n", 2),
        ];
        for (text, line) in cases {
            match read_tracks(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = read_tracks("1,1,0\n".as_bytes()).unwrap();
        let b = read_tracks("1,1,0,0\n".as_bytes()).unwrap();
        assert!(matches!(align(&[&a, &b]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn empty_and_header_only_files() {
        assert!(read_tracks("".as_bytes()).unwrap().tracks.is_empty());
        let r = read_tracks("track_id,frame,x1,x2\n".as_bytes()).unwrap();
        assert!(r.tracks.is_empty());
        let sets = align(&[&r]).unwrap();
        assert!(sets[0].is_empty());
    }

    #[test]
    fn write_then_read_round_trips() {
        let text = "track_id,frame,x1,x2\nu,1,0.5,-2\nu,3,1,1e-7\nv,2,3,4\n";
        let raw = read_tracks(text.as_bytes()).unwrap();
        let set = align(&[&raw]).unwrap().remove(0);
        let mut buf = Vec::new();
        write_tracks(&mut buf, &set, 2).unwrap();
        let back = align(&[&read_tracks(buf.as_slice()).unwrap()]).unwrap().remove(0);
        assert_eq!(set, back);
        let mut empty = Vec::new();
        write_tracks(&mut empty, &TrajectorySet::empty(), 2).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "track_id,frame,x1,x2\n");
    }
}
