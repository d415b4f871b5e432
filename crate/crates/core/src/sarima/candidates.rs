use super::spec::SarimaSpec;

const CANDIDATES: [(&str, &str); 8] = [
    ("Model0", "(0,1,2)x(1,1,0)12"),
    ("Model1", "(0,1,2)x(4,1,0)12"),
    ("Model2", "(0,1,1)x(4,1,0)12"),
    ("Model3", "(0,1,1)x(4,1,0)12[sar3=0]"),
    ("OverSAR", "(0,1,1)x(5,1,0)12[sar3=0]"),
    ("OverSMA", "(0,1,1)x(4,1,1)12[sar3=0]"),
    ("Model4", "(0,1,1)x(4,1,1)12[sar2=0,sar3=0]"),
    ("Model5", "(0,1,1)x(4,1,1)12[sar1=0,sar2=0,sar3=0]"),
];

/// The named candidate models compared for the airport series, in
/// reporting order.
pub fn candidate_models() -> Vec<(&'static str, SarimaSpec)> {
    CANDIDATES
        .iter()
        .map(|(name, text)| (*name, text.parse().expect("built-in spec parses")))
        .collect()
}
