//! The fixed scoring rubric: four named criteria, 25 points each.

pub const CRITERION_COUNT: usize = 4;
pub const CRITERION_MAX: u8 = 25;
pub const TOTAL_MAX: u8 = 100;

/// One scoring criterion with the guidance a judge receives verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    pub name: &'static str,
    pub strengths: &'static str,
    pub weaknesses: &'static str,
}

/// The rubric is fixed: exactly these four criteria, in this order, each
/// scored 0 to 25 for a 100-point total. Construction is private so no
/// caller can alter names, order, or maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rubric {
    criteria: [Criterion; CRITERION_COUNT],
}

const STANDARD: Rubric = Rubric {
    criteria: [
        Criterion {
            name: "Source Coverage",
            strengths: "draws on a diverse base of primary and secondary sources, \
                        spanning regulatory repositories, academic literature, industry \
                        reports, and market data, giving the topic comprehensive coverage",
            weaknesses: "narrow source variety, shallow depth of information, or missing \
                         key regulatory and academic references",
        },
        Criterion {
            name: "Data Accuracy",
            strengths: "figures are current, properly sourced, and free of errors, with \
                        a clear methodology for how data was collected and analysed",
            weaknesses: "outdated information, improper sourcing, errors in data \
                         presentation, unsupported claims, or missing statistical context",
        },
        Criterion {
            name: "Citation Quality",
            strengths: "citations point to authoritative, reputable outlets such as \
                        peer-reviewed articles, government publications, and recognised \
                        industry reports",
            weaknesses: "missing citations, reliance on unreliable or non-authoritative \
                         references, or no citations at all",
        },
        Criterion {
            name: "Report Coherence",
            strengths: "a well organised report with a clear introduction, body, and \
                        conclusion, logical narrative flow, and easy-to-follow \
                        argumentation",
            weaknesses: "poor organisation, unclear transitions, disconnected topics, or \
                         incoherent argumentation",
        },
    ],
};

impl Rubric {
    pub fn standard() -> &'static Rubric {
        &STANDARD
    }

    pub fn criteria(&self) -> &[Criterion; CRITERION_COUNT] {
        &self.criteria
    }

    pub fn names(&self) -> [&'static str; CRITERION_COUNT] {
        [
            self.criteria[0].name,
            self.criteria[1].name,
            self.criteria[2].name,
            self.criteria[3].name,
        ]
    }

    /// The criterion definitions as prompt text for a judge.
    pub fn definitions_text(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.criteria.iter().enumerate() {
            out.push_str(&format!(
                "{}. {} ({} points)\n   Strengths: {}.\n   Weaknesses: {}.\n",
                i + 1,
                c.name,
                CRITERION_MAX,
                c.strengths,
                c.weaknesses,
            ));
        }
        out
    }
}
