//! Construct-based language tutoring: paradigm morphology, a shallow text
//! pipeline, construct detection, cloze and multiple-choice exercises,
//! graded hints and a Rasch learner model.

pub mod commands;
pub mod constructs;
pub mod exercises;
pub mod features;
pub mod feedback;
pub mod gold;
pub mod learner;
pub mod morphology;
pub mod pack;
pub mod pipeline;
pub mod simulate;

pub use constructs::{
    constructs_for_token, detect_constructs, match_government, ConstructDef, ConstructInstance,
};
pub use exercises::{build_cloze, build_mc, generate_candidates, Exercise, ExerciseCandidate};
pub use features::FeatureBundle;
pub use feedback::{build_hint_sequence, diagnose_answer, generate_paraphrase, next_hint, Hint};
pub use morphology::{analyze, generate, MorphAnalysis};
pub use pack::{load_pack, LanguagePack, PackError};
pub use pipeline::{annotate, AnnotatedStory, PipelineError};

/// Annotates `text` and attaches every detected construct instance.
pub fn process_story(
    id: &str,
    text: &str,
    pack: &LanguagePack,
) -> Result<AnnotatedStory, PipelineError> {
    let mut story = annotate(id, text, pack)?;
    story.constructs = detect_constructs(&story, pack);
    Ok(story)
}

/// Cloze exercises for every candidate in the story, hints attached.
pub fn cloze_exercises(story: &AnnotatedStory, pack: &LanguagePack) -> Vec<Exercise> {
    generate_candidates(story, &story.constructs, pack)
        .iter()
        .map(|c| {
            let mut ex = build_cloze(c);
            ex.hints = build_hint_sequence(&ex, story, &story.constructs, pack);
            ex
        })
        .collect()
}
