"""Two-level morphological analysis, lemmatization and tagging for Basque."""

__version__ = "0.1.0"

from .analyzer import (AnalyzerConfig, ParadigmReport, analyze, enumerate_inflections,
                       generate, guess, joint_interpretations, mark_compounds)
from .corpus import (AmbiguityStats, AnnotatedCorpus, EvalReport, ambiguity_stats,
                     evaluate, read_cohorts, tokenize, write_cohorts)
from .disambiguator import (ConstraintGrammar, StatModel, apply_constraints, disambiguate,
                            dump_model, load_model, parse_constraints, train_model,
                            viterbi_decode)
from .errors import (AlignmentMismatch, ConstraintSyntaxError, CorpusFormatError, DataError,
                     EuslemError, LexiconError, ModelFormatError, NoAlignment,
                     RuleCompileError, RuleSyntaxError, TagsetError, TrainingError,
                     UnanalyzableWord, UnknownLemma)
from .lexicon import MorphNetwork, compile_network, parse_lexicon, validate_lexicon
from .pipeline import Pipeline, build_network, load_network, save_network
from .readings import (Analysis, Cohort, EllipsisSlot, MorphemeSegment, Reading, Tag,
                       parse_analysis, render_analysis)
from .tagset import TagsetConfig, load_tagset, project_tag, tag_cohort
from .twolevel import RuleSet, parse_rules

__all__ = [
    "AlignmentMismatch",
    "AmbiguityStats",
    "Analysis",
    "AnalyzerConfig",
    "AnnotatedCorpus",
    "Cohort",
    "ConstraintGrammar",
    "ConstraintSyntaxError",
    "CorpusFormatError",
    "DataError",
    "EllipsisSlot",
    "EuslemError",
    "EvalReport",
    "LexiconError",
    "ModelFormatError",
    "MorphNetwork",
    "MorphemeSegment",
    "NoAlignment",
    "ParadigmReport",
    "Pipeline",
    "Reading",
    "RuleCompileError",
    "RuleSet",
    "RuleSyntaxError",
    "StatModel",
    "Tag",
    "TagsetConfig",
    "TagsetError",
    "TrainingError",
    "UnanalyzableWord",
    "UnknownLemma",
    "ambiguity_stats",
    "analyze",
    "apply_constraints",
    "build_network",
    "compile_network",
    "disambiguate",
    "dump_model",
    "enumerate_inflections",
    "evaluate",
    "generate",
    "guess",
    "joint_interpretations",
    "load_model",
    "load_network",
    "load_tagset",
    "mark_compounds",
    "parse_analysis",
    "parse_constraints",
    "parse_lexicon",
    "parse_rules",
    "project_tag",
    "read_cohorts",
    "render_analysis",
    "save_network",
    "tag_cohort",
    "tokenize",
    "train_model",
    "validate_lexicon",
    "viterbi_decode",
    "write_cohorts",
]
