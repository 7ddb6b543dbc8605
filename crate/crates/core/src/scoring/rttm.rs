//! RTTM: the line-oriented interchange format for speaker segments.
//!
//! Only SPEAKER lines are interpreted:
//!   SPEAKER <recording> <chan> <onset> <duration> <NA> <NA> <speaker> <NA> <NA>
//! Everything else is passed over silently. Emission writes onset and
//! duration with exactly three decimals, sorted by (recording, onset,
//! speaker).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::annotation::Annotation;
use crate::error::{Error, Result};

pub fn parse_rttm(path: impl AsRef<Path>) -> Result<BTreeMap<String, Annotation>> {
    parse_rttm_text(&fs::read_to_string(path.as_ref())?)
}

/// Recording duration is not part of RTTM; each annotation's duration is
/// set to the last segment end of that recording.
pub fn parse_rttm_text(text: &str) -> Result<BTreeMap<String, Annotation>> {
    let mut out: BTreeMap<String, Annotation> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() != Some(&"SPEAKER") {
            continue;
        }
        if fields.len() < 8 {
            return Err(Error::parse(
                lineno,
                format!("SPEAKER line has {} fields, need at least 8", fields.len()),
            ));
        }
        let recording = fields[1];
        let onset: f64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad onset {:?}", fields[3])))?;
        let duration: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad duration {:?}", fields[4])))?;
        if !onset.is_finite() || onset < 0.0 {
            return Err(Error::parse(lineno, format!("negative onset {onset}")));
        }
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::parse(lineno, format!("negative duration {duration}")));
        }
        let speaker = fields[7];
        let a = out
            .entry(recording.to_string())
            .or_insert_with(|| Annotation::new(recording, 0.0));
        a.push(speaker, onset, onset + duration);
        a.duration = a.duration.max(onset + duration);
    }
    Ok(out)
}

/// One SPEAKER line per segment; byte-deterministic for a fixed input.
pub fn emit_rttm(annotations: &[Annotation]) -> String {
    let mut lines: Vec<(String, f64, String, f64)> = Vec::new();
    for a in annotations {
        for seg in &a.segments {
            lines.push((
                a.recording_id.clone(),
                seg.start,
                seg.speaker.clone(),
                seg.duration(),
            ));
        }
    }
    lines.sort_by(|x, y| {
        (&x.0, &x.1, &x.2)
            .partial_cmp(&(&y.0, &y.1, &y.2))
            .unwrap()
    });
    let mut out = String::new();
    for (rec, onset, speaker, dur) in lines {
        out.push_str(&format!(
            "SPEAKER {rec} 1 {onset:.3} {dur:.3} <NA> <NA> {speaker} <NA> <NA>\n"
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn single_line_round_trip_of_fields() {
        let map =
            parse_rttm_text("SPEAKER rec1 1 0.00 5.00 <NA> <NA> A <NA> <NA>\n").unwrap();
        let a = &map["rec1"];
        assert_eq!(a.segments.len(), 1);
        assert_eq!(a.segments[0].speaker, "A");
        assert_eq!(a.segments[0].start, 0.0);
        assert_eq!(a.segments[0].end, 5.0);
        assert_eq!(a.duration, 5.0);
    }

    #[test]
    fn empty_and_comment_lines_are_skipped() {
        let map = parse_rttm_text(";; header\n\nNON-SPEECH rec1 1 0 1 x x x x x\n").unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn negative_duration_is_a_parse_error_with_line_number() {
        let err = parse_rttm_text(
            "SPEAKER rec1 1 0.00 5.00 <NA> <NA> A <NA> <NA>\nSPEAKER rec1 1 2.0 -1.0 <NA> <NA> B <NA> <NA>\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn malformed_onset_is_a_parse_error() {
        let err =
            parse_rttm_text("SPEAKER rec1 1 zero 5.00 <NA> <NA> A <NA> <NA>\n").unwrap_err();
        assert!(err.to_string().contains("onset"), "{err}");
    }

    #[test]
    fn emission_formats_three_decimals_with_bankers_rounding() {
        let mut a = Annotation::new("rec1", 4.0);
        a.push("A", 1.2345, 3.2345);
        let text = emit_rttm(&[a]);
        // 1.2345 stores as slightly under the tie, so 3 decimals print 1.234.
        assert_eq!(text, "SPEAKER rec1 1 1.234 2.000 <NA> <NA> A <NA> <NA>\n");
    }

    #[test]
    fn emission_sorts_by_recording_onset_speaker() {
        let mut a = Annotation::new("b_rec", 10.0);
        a.push("Z", 5.0, 6.0);
        a.push("A", 5.0, 6.0);
        a.push("M", 1.0, 2.0);
        let mut b = Annotation::new("a_rec", 10.0);
        b.push("Q", 9.0, 10.0);
        let text = emit_rttm(&[a, b]);
        let recs: Vec<&str> = text.lines().map(|l| l.split(' ').nth(1).unwrap()).collect();
        assert_eq!(recs, vec!["a_rec", "b_rec", "b_rec", "b_rec"]);
        let speakers: Vec<&str> =
            text.lines().map(|l| l.split(' ').nth(7).unwrap()).collect();
        assert_eq!(speakers, vec!["Q", "M", "A", "Z"]);
    }

    #[test]
    fn round_trip_preserves_segments_at_millisecond_precision() {
        let mut rng = Rng::new(99);
        let mut annotations = Vec::new();
        for r in 0..3 {
            let mut a = Annotation::new(format!("rec{r}"), 30.0);
            for s in 0..5 {
                let start = rng.uniform_f64(0.0, 20.0);
                let len = rng.uniform_f64(0.1, 8.0);
                a.push(format!("spk{}", s % 2), start, start + len);
            }
            annotations.push(a);
        }
        let text = emit_rttm(&annotations);
        let back = parse_rttm_text(&text).unwrap();
        assert_eq!(back.len(), 3);
        for a in &annotations {
            let b = &back[&a.recording_id];
            assert_eq!(b.segments.len(), a.segments.len());
            let mut want = a.segments.clone();
            want.sort_by(|x, y| x.start.partial_cmp(&y.start).unwrap());
            for (got, want) in b.segments.iter().zip(&want) {
                assert_eq!(got.speaker, want.speaker);
                assert!((got.start - want.start).abs() <= 5e-4);
                assert!((got.end - want.end).abs() <= 1e-3);
            }
        }
    }
}
