//! Shipped model files for the worked figures.

use crate::error::{Error, Result};
use crate::model::{parse_model, ModelFile};

pub const FIXTURES: &[(&str, &str)] = &[
    ("fig1", include_str!("../fixtures/fig1.model")),
    ("fig2_i", include_str!("../fixtures/fig2_i.model")),
    ("fig2_iii", include_str!("../fixtures/fig2_iii.model")),
    ("fig3_i", include_str!("../fixtures/fig3_i.model")),
    ("fig3_ii", include_str!("../fixtures/fig3_ii.model")),
    ("fig5_i", include_str!("../fixtures/fig5_i.model")),
    ("fig5_ii", include_str!("../fixtures/fig5_ii.model")),
    ("fig5_iii", include_str!("../fixtures/fig5_iii.model")),
    ("fig6_i", include_str!("../fixtures/fig6_i.model")),
    ("fig6_ii", include_str!("../fixtures/fig6_ii.model")),
    ("fig7", include_str!("../fixtures/fig7.model")),
];

pub fn text(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<ModelFile> {
    parse_model(text(name).ok_or_else(|| Error::Invalid(format!("no fixture `{name}`")))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeSign;

    #[test]
    fn all_parse() {
        for (name, _) in FIXTURES {
            load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn fig7_all_positive() {
        let m = load("fig7").unwrap();
        assert_eq!(m.graph.edges().count(), 10);
        assert!(m.graph.edges().all(|(_, _, s)| s == EdgeSign::Positive));
    }
}
