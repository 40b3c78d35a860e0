//! Phase 2: impact dimensions and control effectiveness give a residual
//! classification and a significance flag.
//!
//! ```text
//! cargo run --example classify_scenarios
//! ```

use fria::catalog::Thresholds;
use fria::profile::StakeholderRef;
use fria::scenarios::{classify, ControlAssessment, ControlEffectiveness, DimensionScores};

fn main() {
    let thresholds = Thresholds::default();
    let owner = StakeholderRef::role_only("clinical_lead");
    let cases = [
        ("automation bias, no controls", DimensionScores::new(3, 2, 2, 2)),
        ("underrepresentation", DimensionScores::new(2, 2, 2, 3)),
        ("minor inconvenience", DimensionScores::new(1, 0, 1, 1)),
    ];
    println!(
        "{:<30} {:<20} {:<18} significant",
        "scenario", "control", "classification"
    );
    for (label, dims) in cases {
        for effectiveness in ControlEffectiveness::ALL {
            let control = ControlAssessment {
                effectiveness,
                evidence_refs: vec!["evidence".into()],
                control_owner: owner.clone(),
            };
            let out = classify(&dims, &control, &thresholds);
            println!(
                "{label:<30} {:<20} {:<18} {}",
                effectiveness.as_str(),
                out.classification.as_str(),
                out.significant
            );
        }
    }
}
