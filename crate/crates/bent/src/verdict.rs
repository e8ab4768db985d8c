//! Final classification from the component results.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// PPT, and the range search plus contradiction point to entanglement:
    /// a bound-entanglement candidate.
    PptAndEntangledEvidence,
    Npt,
    PptNoEntanglementEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PptAndEntangledEvidence => "PPT_AND_ENTANGLED_EVIDENCE",
            Verdict::Npt => "NPT",
            Verdict::PptNoEntanglementEvidence => "PPT_NO_ENTANGLEMENT_EVIDENCE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the verdict depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evidence {
    /// `Some(true)` for PPT; `None` if the eigenvalue stage did not complete.
    pub ppt: Option<bool>,
    pub best_overlap: Option<f64>,
    pub search_converged: bool,
    pub contradiction: Option<f64>,
    pub overlap_margin: f64,
    pub contradiction_floor: f64,
}

/// | PPT stage | range evidence                         | verdict                      |
/// |-----------|----------------------------------------|------------------------------|
/// | NPT       | any                                    | NPT                          |
/// | PPT       | overlap < 1 - margin and contr. > floor | PPT_AND_ENTANGLED_EVIDENCE   |
/// | PPT       | otherwise, search converged, contr. known | PPT_NO_ENTANGLEMENT_EVIDENCE |
/// | PPT       | otherwise                              | INCONCLUSIVE                 |
/// | missing   | any                                    | INCONCLUSIVE                 |
pub fn decide(e: &Evidence) -> Verdict {
    match e.ppt {
        Some(false) => Verdict::Npt,
        None => Verdict::Inconclusive,
        Some(true) => {
            let separated = e.best_overlap.is_some_and(|f| f < 1.0 - e.overlap_margin);
            let contradicts = e.contradiction.is_some_and(|c| c > e.contradiction_floor);
            if separated && contradicts {
                Verdict::PptAndEntangledEvidence
            } else if e.search_converged && e.best_overlap.is_some() && e.contradiction.is_some() {
                Verdict::PptNoEntanglementEvidence
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_combination_has_exactly_one_verdict() {
        let ppts = [None, Some(false), Some(true)];
        let overlaps = [None, Some(0.5), Some(1.0 - 1e-4), Some(1.0)];
        let contradictions = [None, Some(0.0), Some(1e-12), Some(1e-3)];
        let mut seen = std::collections::HashSet::new();
        for ppt in ppts {
            for best_overlap in overlaps {
                for search_converged in [false, true] {
                    for contradiction in contradictions {
                        let e = Evidence {
                            ppt,
                            best_overlap,
                            search_converged,
                            contradiction,
                            overlap_margin: 1e-4,
                            contradiction_floor: 1e-12,
                        };
                        let v = decide(&e);
                        seen.insert(v);
                        match ppt {
                            Some(false) => assert_eq!(v, Verdict::Npt),
                            None => assert_eq!(v, Verdict::Inconclusive),
                            Some(true) => {
                                let evidence = best_overlap.is_some_and(|f| f < 1.0 - 1e-4)
                                    && contradiction.is_some_and(|c| c > 1e-12);
                                assert_eq!(v == Verdict::PptAndEntangledEvidence, evidence);
                                assert_ne!(v, Verdict::Npt);
                            }
                        }
                        assert_eq!(decide(&e), v);
                    }
                }
            }
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn names_match_report_strings() {
        assert_eq!(
            serde_json::to_string(&Verdict::PptAndEntangledEvidence).unwrap(),
            "\"PPT_AND_ENTANGLED_EVIDENCE\""
        );
        assert_eq!(
            serde_json::to_string(&Verdict::PptNoEntanglementEvidence).unwrap(),
            "\"PPT_NO_ENTANGLEMENT_EVIDENCE\""
        );
        assert_eq!(Verdict::Npt.to_string(), "NPT");
    }
}
