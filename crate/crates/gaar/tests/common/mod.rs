//! Shared fixtures for the integration suites: the contraception/abortion
//! walkthrough argument with its per-stage engine outputs, transcribed as a
//! golden scripted run (two iterations: the first prunes P6 and fails
//! accuracy, the second passes all three criteria).

use gaar::pipeline::ArgumentInput;

pub fn walkthrough_input() -> ArgumentInput {
    ArgumentInput::new(
        "Should abortion be allowed?",
        None,
        "We allow contraception. Abortion is, in effect, no different – the prevention of \
         the development of a potential human being. In the case of the `morning after \
         pill', the analogy is even closer. If we allow these measures, then we should \
         also allow abortion.",
    )
    .unwrap()
}

pub const STAGE_1_1_FALLACY: &str = "# Fallacy Detection\n\n## Formal Fallacy\nNone\n\n## Informal Fallacies\n- false equivalence: The argument treats contraception and abortion as equivalent solely because both prevent the development of a potential human being, glossing over morally relevant differences between the two practices.\n";

pub const STAGE_1_2_RECONSTRUCTION: &str = "# Argument Reconstruction\n\n## Premises\nP1: We allow contraception.\nP2: Contraception prevents the development of a potential human being.\nP3: Abortion prevents the development of a potential human being.\nP4: (Implicit) Preventing the development of a potential human being is the morally relevant property for determining permissibility in these cases.\nP5: (Implicit) If two practices share the morally relevant property of preventing the development of a potential human being, and one practice is allowed, then the other practice should also be allowed.\nP6: The morning-after pill is a form of contraception that is very similar to early abortion in its mechanism and timing.\n\n## Intermediate Conclusions\nNone\n\n## Conclusion\nWe should allow abortion (specifically, abortion on demand)\n\n## Logical Connections\nP2 and P3 establish that contraception and abortion share the property of preventing the development of a potential human being. P4 marks that property as morally relevant, and P5 transfers permissibility from contraception (P1) to abortion. P6 notes the morning-after pill as an especially close case.\n";

pub const STAGE_1_3_FORMALIZATION: &str = "# Formalized Argument\n\n## Defined Variables/Predicates\nC = contraception\nA = abortion\nO = morning after pill\nP(x) = x prevents the development of a potential human being\nL(x) = we allow/should allow x\nM(x) = x has the morally relevant property in this context\n\n## Formalized Premises\nP1: L(C)\nP2: P(C)\nP3: P(A)\nP4: ∀x [P(x) → M(x)]\nP5: ∀x∀y [(M(x) ∧ M(y) ∧ L(x)) → L(y)]\nP6: M(O)\n\n## Formalized Conclusion\nC: L(A)\n";

pub const STAGE_1_5_STREAMLINED: &str = "### NL Premises\nP1: We allow (or should allow) contraception.\nP2: Contraception prevents the development of a potential human being.\nP3: Abortion prevents the development of a potential human being.\nP4: For anything x, if x prevents the development of a potential human being, then x has the morally relevant property in this context.\nP5: For any two things x and y, if both x and y have the morally relevant property in this context, and we allow x, then we should allow y.\n\n### NL Conclusion\nC: We allow (or should allow) abortion.\n";

pub const STAGE_1_6_FAITHFULNESS: &str = "# Reasoning\nP4 and P5 are over-generalized, and the conclusion has lost its normative force.\n\n# Faithfulness\nAccuracy: No - P4 and P5 are over-generalized. For example, this formulation would also apply to abstinence or celibacy, which \"prevent the development of a potential human being\" but are clearly not what the original argument intends. The conclusion \"We allow abortion\" is also descriptive, but the original argument's conclusion is normative: \"We should allow abortion.\"\nCompleteness: Yes\nParsimony: Yes\n";

pub const STAGE_2_2_RECONSTRUCTION: &str = "# Argument Reconstruction\n\n## Premises\nP1: We allow contraception.\nP2: Contraception prevents the development of a potential human being.\nP3: Abortion prevents the development of a potential human being.\nP4: (Implicit) If contraception prevents the development of a potential human being, and abortion prevents the development of a potential human being, then contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being.\nP5: (Implicit) If contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being, and we allow contraception, then we should allow abortion.\n\n## Intermediate Conclusions\nNone\n\n## Conclusion\nWe should allow abortion.\n\n## Logical Connections\nP2 and P3 jointly trigger P4, establishing relevant similarity between contraception and abortion; P5 combines that similarity with P1 to yield the conclusion.\n";

pub const STAGE_2_3_FORMALIZATION: &str = "# Formalized Argument\n\n## Defined Variables/Predicates\nC = contraception\nA = abortion\nP(x) = x prevents the development of a potential human being\nL(x) = we allow x\nS(x) = we should allow x\nR(x, y) = x and y are relevantly similar in the respect of preventing the development of a potential human being\n\n## Formalized Premises\nP1: L(C)\nP2: P(C)\nP3: P(A)\nP4: (P(C) ∧ P(A)) → R(C, A)\nP5: (R(C, A) ∧ L(C)) → S(A)\n\n## Formalized Conclusion\nC: S(A)\n";

pub const STAGE_2_5_STREAMLINED: &str = "### NL Premises\nP1: We allow contraception.\nP2: Contraception prevents the development of a potential human being.\nP3: Abortion prevents the development of a potential human being.\nP4: If both contraception and abortion prevent the development of a potential human being, then contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being.\nP5: If contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being, and we allow contraception, then we should allow abortion.\n\n### NL Conclusion\nC: We should allow abortion.\n";

pub const STAGE_2_6_FAITHFULNESS: &str = "# Reasoning\nThe premises track the original analogical structure without over-generalizing, and the conclusion is normative as intended. This reconstruction is faithful.\n\n# Faithfulness\nAccuracy: Yes\nCompleteness: Yes\nParsimony: Yes\n";

/// The nine stage responses of the walkthrough, in engine call order.
pub fn walkthrough_script() -> Vec<String> {
    vec![
        STAGE_1_1_FALLACY.to_string(),
        STAGE_1_2_RECONSTRUCTION.to_string(),
        STAGE_1_3_FORMALIZATION.to_string(),
        STAGE_1_5_STREAMLINED.to_string(),
        STAGE_1_6_FAITHFULNESS.to_string(),
        STAGE_2_2_RECONSTRUCTION.to_string(),
        STAGE_2_3_FORMALIZATION.to_string(),
        STAGE_2_5_STREAMLINED.to_string(),
        STAGE_2_6_FAITHFULNESS.to_string(),
    ]
}

/// The Stage 2-5 premise texts the final reconstruction must match.
pub const FINAL_PREMISES: [&str; 5] = [
    "We allow contraception.",
    "Contraception prevents the development of a potential human being.",
    "Abortion prevents the development of a potential human being.",
    "If both contraception and abortion prevent the development of a potential human being, then contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being.",
    "If contraception and abortion are relevantly similar in the respect of preventing the development of a potential human being, and we allow contraception, then we should allow abortion.",
];

pub const FINAL_CONCLUSION: &str = "We should allow abortion.";

/// Whitespace-insensitive text comparison.
pub fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
