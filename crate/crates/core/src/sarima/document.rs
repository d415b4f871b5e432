//! Versioned JSON document for fitted models.
//!
//! Floats are written in shortest round-trip form and parsed back with
//! correct rounding, so save/load reproduces every coefficient bit for bit.

use serde::{Deserialize, Serialize};

use super::fit::{FittedModel, StoredParts};
use crate::error::{Error, Result};
use crate::series::MonthIndex;

pub const DOCUMENT_FORMAT: &str = "sparse-sarima-model";
pub const DOCUMENT_VERSION: u32 = 1;

/// Inclusive month range of the training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainWindow {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    format: String,
    version: u32,
    train_window: TrainWindow,
    model: StoredParts,
}

impl ModelDocument {
    pub fn from_model(model: &FittedModel) -> Self {
        Self {
            format: DOCUMENT_FORMAT.to_string(),
            version: DOCUMENT_VERSION,
            train_window: TrainWindow {
                start: model.train().start(),
                end: model.train().end(),
            },
            model: model.to_stored_parts(),
        }
    }

    pub fn train_window(&self) -> TrainWindow {
        self.train_window
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Document(format!("not valid JSON: {e}")))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(DOCUMENT_FORMAT) => {}
            Some(other) => return Err(Error::Document(format!("unknown format '{other}'"))),
            None => return Err(Error::Document("missing 'format' field".into())),
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(DOCUMENT_VERSION) => {}
            Some(v) => return Err(Error::Document(format!("unsupported version {v}"))),
            None => return Err(Error::Document("missing 'version' field".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn into_model(self) -> Result<FittedModel> {
        let model = FittedModel::from_stored_parts(self.model)?;
        if model.train().start() != self.train_window.start || model.train().end() != self.train_window.end {
            return Err(Error::Document("train_window disagrees with the stored training series".into()));
        }
        Ok(model)
    }
}

impl FittedModel {
    pub fn to_document(&self) -> String {
        ModelDocument::from_model(self).to_json()
    }

    pub fn from_document(text: &str) -> Result<Self> {
        ModelDocument::parse(text)?.into_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarima::{fit, simulate, CoefficientSet, SarimaSpec};

    fn fitted() -> FittedModel {
        let spec: SarimaSpec = "(0,1,1)x(1,1,0)12".parse().unwrap();
        let c = CoefficientSet::from_free(&spec, &[-0.4, -0.5]).unwrap();
        let y = simulate(&spec, &c, 1.0, 90, 5).unwrap();
        fit(&spec, &y).unwrap()
    }

    #[test]
    fn exact_round_trip() {
        let m = fitted();
        let text = m.to_document();
        let back = FittedModel::from_document(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_document(), text);
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(matches!(
            FittedModel::from_document("{\"format\":\"other\",\"version\":1}"),
            Err(Error::Document(_))
        ));
        let text = fitted().to_document().replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(FittedModel::from_document(&text), Err(Error::Document(_))));
        assert!(FittedModel::from_document("not json").is_err());
    }
}
