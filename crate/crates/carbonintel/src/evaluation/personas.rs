//! The sixteen-persona judge registry.
//!
//! Personas are configured in TOML: a name, an expertise description, one
//! of five expertise groups, and an optional model binding id (the group
//! default applies when omitted). The registry size is fixed at sixteen.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evaluation::EvalError;

pub const PERSONA_COUNT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonaGroup {
    ClimatePolicyAndRegulatory,
    EnvironmentalAndEconomicAnalysis,
    ScientificAndTechnical,
    SustainabilityAndFinance,
    SpecialisedPerspectives,
}

impl PersonaGroup {
    pub const ALL: [PersonaGroup; 5] = [
        PersonaGroup::ClimatePolicyAndRegulatory,
        PersonaGroup::EnvironmentalAndEconomicAnalysis,
        PersonaGroup::ScientificAndTechnical,
        PersonaGroup::SustainabilityAndFinance,
        PersonaGroup::SpecialisedPerspectives,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PersonaGroup::ClimatePolicyAndRegulatory => "climate_policy_and_regulatory",
            PersonaGroup::EnvironmentalAndEconomicAnalysis => {
                "environmental_and_economic_analysis"
            }
            PersonaGroup::ScientificAndTechnical => "scientific_and_technical",
            PersonaGroup::SustainabilityAndFinance => "sustainability_and_finance",
            PersonaGroup::SpecialisedPerspectives => "specialised_perspectives",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|g| g.as_str() == text)
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            PersonaGroup::ClimatePolicyAndRegulatory => "Climate Policy and Regulatory Experts",
            PersonaGroup::EnvironmentalAndEconomicAnalysis => {
                "Environmental and Economic Analysis"
            }
            PersonaGroup::ScientificAndTechnical => "Scientific and Technical Experts",
            PersonaGroup::SustainabilityAndFinance => "Sustainability and Finance Specialists",
            PersonaGroup::SpecialisedPerspectives => "Specialised Perspectives",
        }
    }

    /// Default model binding id per group. Binding ids are opaque config
    /// strings resolved to endpoints by the run configuration.
    pub fn default_binding(&self) -> &'static str {
        match self {
            PersonaGroup::ClimatePolicyAndRegulatory => "claude-3-opus-mini",
            PersonaGroup::EnvironmentalAndEconomicAnalysis => "claude-3-1-mini",
            PersonaGroup::ScientificAndTechnical => "gpt-4.5",
            PersonaGroup::SustainabilityAndFinance => "gpt-4o",
            PersonaGroup::SpecialisedPerspectives => "gpt-4o-mini",
        }
    }
}

impl std::fmt::Display for PersonaGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaSpec {
    pub name: String,
    pub expertise: String,
    pub group: PersonaGroup,
    /// Model binding id; resolved to a concrete endpoint by configuration.
    pub binding: String,
}

/// Exactly sixteen validated personas; construction only via `load_personas`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonaRegistry {
    personas: Vec<PersonaSpec>,
}

impl PersonaRegistry {
    pub fn personas(&self) -> &[PersonaSpec] {
        &self.personas
    }

    pub fn iter(&self) -> impl Iterator<Item = &PersonaSpec> {
        self.personas.iter()
    }
}

#[derive(Deserialize)]
struct PersonaFile {
    #[serde(default)]
    personas: Vec<RawPersona>,
}

#[derive(Deserialize)]
struct RawPersona {
    name: String,
    expertise: String,
    group: String,
    binding: Option<String>,
}

/// Parses and validates a persona config. The count must be exactly
/// sixteen; names must be unique; groups must be one of the five known
/// groups; an omitted binding falls back to the group default, but an
/// explicitly empty one is rejected.
pub fn load_personas(text: &str) -> Result<PersonaRegistry, EvalError> {
    let file: PersonaFile =
        toml::from_str(text).map_err(|e| EvalError::Personas(format!("invalid TOML: {e}")))?;
    if file.personas.len() != PERSONA_COUNT {
        return Err(EvalError::Personas(format!(
            "expected {PERSONA_COUNT} personas, found {}",
            file.personas.len()
        )));
    }
    let mut seen = BTreeSet::new();
    let mut personas = Vec::with_capacity(PERSONA_COUNT);
    for raw in file.personas {
        if raw.name.trim().is_empty() {
            return Err(EvalError::Personas("persona with an empty name".into()));
        }
        if !seen.insert(raw.name.clone()) {
            return Err(EvalError::Personas(format!(
                "duplicate persona name {:?}",
                raw.name
            )));
        }
        if raw.expertise.trim().is_empty() {
            return Err(EvalError::Personas(format!(
                "persona {:?} has an empty expertise description",
                raw.name
            )));
        }
        let group = PersonaGroup::parse(&raw.group).ok_or_else(|| {
            EvalError::Personas(format!(
                "persona {:?} names unknown group {:?}",
                raw.name, raw.group
            ))
        })?;
        let binding = match raw.binding {
            Some(b) if b.trim().is_empty() => {
                return Err(EvalError::Personas(format!(
                    "persona {:?} has an empty model binding",
                    raw.name
                )));
            }
            Some(b) => b,
            None => group.default_binding().to_owned(),
        };
        personas.push(PersonaSpec {
            name: raw.name,
            expertise: raw.expertise,
            group,
            binding,
        });
    }
    Ok(PersonaRegistry { personas })
}

pub fn load_personas_file(path: &Path) -> Result<PersonaRegistry, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    load_personas(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn persona_toml(n: usize) -> String {
        let mut out = String::new();
        for i in 0..n {
            let group = PersonaGroup::ALL[i % PersonaGroup::ALL.len()];
            out.push_str(&format!(
                "[[personas]]\nname = \"Persona {i}\"\nexpertise = \"Domain {i}\"\n\
                 group = \"{}\"\n\n",
                group.as_str()
            ));
        }
        out
    }

    #[test]
    fn sixteen_personas_load_with_group_default_bindings() {
        let registry = load_personas(&persona_toml(16)).unwrap();
        assert_eq!(registry.personas().len(), 16);
        let first = &registry.personas()[0];
        assert_eq!(first.group, PersonaGroup::ClimatePolicyAndRegulatory);
        assert_eq!(first.binding, "claude-3-opus-mini");
    }

    #[test]
    fn fifteen_and_seventeen_are_rejected() {
        let err = load_personas(&persona_toml(15)).unwrap_err();
        assert!(err.to_string().contains("expected 16 personas, found 15"), "{err}");
        let err = load_personas(&persona_toml(17)).unwrap_err();
        assert!(err.to_string().contains("found 17"), "{err}");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = persona_toml(16).replace("Persona 1", "Persona 0");
        let err = load_personas(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate persona name"), "{err}");
    }

    #[test]
    fn unknown_group_is_rejected() {
        let text = persona_toml(16).replacen(
            "climate_policy_and_regulatory",
            "galactic_policy",
            1,
        );
        let err = load_personas(&text).unwrap_err();
        assert!(err.to_string().contains("unknown group \"galactic_policy\""), "{err}");
    }

    #[test]
    fn explicit_empty_binding_is_rejected() {
        let mut text = persona_toml(16);
        text.push_str("\n");
        let text = text.replacen(
            "expertise = \"Domain 0\"\n",
            "expertise = \"Domain 0\"\nbinding = \"\"\n",
            1,
        );
        let err = load_personas(&text).unwrap_err();
        assert!(err.to_string().contains("empty model binding"), "{err}");
    }

    #[test]
    fn explicit_binding_overrides_the_group_default() {
        let text = persona_toml(16).replacen(
            "expertise = \"Domain 0\"\n",
            "expertise = \"Domain 0\"\nbinding = \"local-override\"\n",
            1,
        );
        let registry = load_personas(&text).unwrap();
        assert_eq!(registry.personas()[0].binding, "local-override");
    }

    #[test]
    fn groups_round_trip_through_their_names() {
        for group in PersonaGroup::ALL {
            assert_eq!(PersonaGroup::parse(group.as_str()), Some(group));
        }
        assert_eq!(PersonaGroup::parse("other"), None);
    }
}
