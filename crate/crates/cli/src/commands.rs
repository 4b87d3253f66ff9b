use std::fs;
use std::path::{Path, PathBuf};

use iwisdm::dataset::{load_dataset, write_dataset, Dataset};
use iwisdm::harness::{read_responses, score, simulate_random, write_responses_jsonl, MatchMode, ScoreReport};
use iwisdm::presets::{generate_benchmark, generate_preset, preset_task, single_frame_set};
use iwisdm::render::CanvasConfig;
use iwisdm::stimulus::builtin_catalog;

use crate::args::{GenerateArgs, OutputArgs, PresetArgs, ScoreArgs, SingleFrameArgs};
use crate::CliError;

pub const SEED_VAR: &str = "IWISDM_SEED";

/// `flag` unless `env` holds a seed.
pub fn resolve_seed(flag: u64, env: Option<&str>) -> Result<u64, CliError> {
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_VAR}={text} is not an unsigned integer"))),
        None => Ok(flag),
    }
}

fn seed_from_env(flag: u64) -> Result<u64, CliError> {
    resolve_seed(flag, std::env::var(SEED_VAR).ok().as_deref())
}

/// What a generation command wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub out: PathBuf,
    pub files: usize,
    pub dataset: Dataset,
}

impl Generated {
    pub fn summary(&self) -> String {
        let m = &self.dataset.manifest;
        format!(
            "wrote {} {} trials (seed {}) as {} files under {}",
            m.n,
            m.level,
            m.seed,
            self.files,
            self.out.display()
        )
    }
}

fn write(dataset: Dataset, output: &OutputArgs) -> Result<Generated, CliError> {
    let catalog = builtin_catalog();
    let out = output
        .out
        .clone()
        .unwrap_or_else(|| Path::new("datasets").join(&dataset.manifest.level));
    let canvas = CanvasConfig::default();
    let files = write_dataset(&dataset, &out, &catalog, (!output.no_render).then_some(&canvas))?.len();
    Ok(Generated { out, files, dataset })
}

pub fn generate(args: &GenerateArgs) -> Result<Generated, CliError> {
    let seed = seed_from_env(args.output.seed)?;
    let catalog = builtin_catalog();
    let dataset = generate_benchmark(
        args.complexity,
        args.num as usize,
        seed,
        &catalog,
        args.distractors as usize,
    )?;
    write(dataset, &args.output)
}

pub fn preset(args: &PresetArgs) -> Result<Generated, CliError> {
    let seed = seed_from_env(args.output.seed)?;
    let catalog = builtin_catalog();
    let task = preset_task(args.task, args.attr.into(), args.frames)?;
    let dataset = generate_preset(&task, args.num as usize, seed, &catalog)?;
    write(dataset, &args.output)
}

pub fn singleframe(args: &SingleFrameArgs) -> Result<Generated, CliError> {
    let seed = seed_from_env(args.output.seed)?;
    let catalog = builtin_catalog();
    let dataset = single_frame_set(args.kind, args.num as usize, seed, &catalog)?;
    write(dataset, &args.output)
}

/// Report path used when `--report` is absent.
pub fn default_report_path(responses: &Path) -> PathBuf {
    let mut name = responses.file_name().unwrap_or_default().to_os_string();
    name.push(".report.json");
    responses.with_file_name(name)
}

pub fn score_command(args: &ScoreArgs) -> Result<(ScoreReport, PathBuf), CliError> {
    let catalog = builtin_catalog();
    let dataset = load_dataset(&args.dataset, catalog.space())?;
    if args.simulate_random {
        let seed = seed_from_env(args.seed)?;
        let text = write_responses_jsonl(&simulate_random(&dataset, seed));
        fs::write(&args.responses, text).map_err(|source| CliError::Io {
            path: args.responses.clone(),
            source,
        })?;
    }
    let responses = read_responses(&args.responses)?;
    let mode = if args.lenient {
        MatchMode::Lenient
    } else {
        MatchMode::Strict
    };
    let report = score(&dataset, &responses, mode)?;
    let path = args
        .report
        .clone()
        .unwrap_or_else(|| default_report_path(&args.responses));
    fs::write(&path, report.to_json()).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((report, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn environment_seed_wins() {
        assert_eq!(resolve_seed(3, None).unwrap(), 3);
        assert_eq!(resolve_seed(3, Some("17")).unwrap(), 17);
        assert!(matches!(resolve_seed(3, Some("seven")), Err(CliError::Usage(_))));
    }

    #[test]
    fn report_sits_next_to_responses() {
        assert_eq!(
            default_report_path(Path::new("a/b.jsonl")),
            PathBuf::from("a/b.jsonl.report.json")
        );
    }
}
