# Copyright 2026 The RehabAssess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command-line entry point: rehab-assess <subcommand> [options].

Subcommands follow the pipeline: synth -> extract -> train / select ->
evaluate, and feedback for a single repetition. Data goes to files or
stdout, logs to stderr. Exit code 2 means a usage error, 1 a pipeline
error.
"""

import argparse
import dataclasses
import json
import os
import sys
import traceback
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from rehab_assess.algo.double_q import SelectorModel
from rehab_assess.algo.double_q import select_and_classify
from rehab_assess.algo.double_q import train_selector
from rehab_assess.algo.rfe import rfe_select
from rehab_assess.config import RunConfig
from rehab_assess.config import build_section
from rehab_assess.config import load_run_config
from rehab_assess.data.io import parse_dataset
from rehab_assess.data.io import serialize_dataset
from rehab_assess.data.motion import COMPONENTS
from rehab_assess.data.motion import Exercise
from rehab_assess.data.motion import Side
from rehab_assess.data.synth import CorpusSpec
from rehab_assess.data.synth import synth_dataset
from rehab_assess.errors import ConfigError
from rehab_assess.errors import IoError
from rehab_assess.errors import RehabError
from rehab_assess.errors import UnknownSubject
from rehab_assess.evaluation import emit_results_table
from rehab_assess.evaluation import load_tp_agreement
from rehab_assess.evaluation import loso_evaluate
from rehab_assess.feedback import deviation_scores
from rehab_assess.feedback import generate_feedback
from rehab_assess.feedback import load_templates
from rehab_assess.feedback import profile_for
from rehab_assess.kinematics import FeatureTable
from rehab_assess.kinematics import feature_table
from rehab_assess.kinematics import read_feature_csv
from rehab_assess.obs_norm import NormParams
from rehab_assess.obs_norm import apply_zscore
from rehab_assess.obs_norm import fit_zscore_matrix
from rehab_assess.policy.mlp import Architecture
from rehab_assess.policy.mlp import MlpModel
from rehab_assess.policy.mlp import model_from_flat
from rehab_assess.policy.mlp import predict
from rehab_assess.task.acquisition import RewardSpec
from rehab_assess.trainer import Trainer
from rehab_assess.util import convert
from rehab_assess.util import create_logger
from rehab_assess.util import load_model
from rehab_assess.util import load_yaml
from rehab_assess.util import save_model
from rehab_assess.util import write_json
from rehab_assess.version import __version__

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
PREDICTOR_FILE = 'predictor.json'
GRID_REPORT_FILE = 'grid_report.json'
QNET_ONLINE_FILE = 'qnet_online.json'
QNET_TARGET_FILE = 'qnet_target.json'
RFE_FILE = 'rfe.json'
RFE_MODEL_FILE = 'rfe_predictor.json'
TRACES_FILE = 'traces.jsonl'


class UsageError(Exception):
    pass


def component_file(component: str) -> str:
    return 'predictor_{}.json'.format(component)


def error_stage(e: BaseException) -> str:
    """Module of the package where the exception was raised."""
    stage = 'cli'
    for frame in traceback.extract_tb(e.__traceback__):
        filename = os.path.abspath(frame.filename)
        if filename.startswith(PACKAGE_DIR + os.sep):
            stage = os.path.splitext(os.path.basename(filename))[0]
    return stage


# Inputs and outputs.

def _load_table(args, cfg: RunConfig, logger) -> FeatureTable:
    features = getattr(args, 'features', None) or (
        None if getattr(args, 'input', None) else cfg.paths.features)
    corpus = getattr(args, 'input', None) or cfg.paths.corpus
    if features:
        logger.info('Reading features from {}'.format(features))
        return read_feature_csv(features)
    if corpus:
        logger.info('Extracting features from {}'.format(corpus))
        return feature_table(parse_dataset(corpus), cfg.features,
                             threads=cfg.threads)
    raise UsageError('no input: pass --features or --in '
                     '(or set paths in the config)')


def _labeled_rows(table: FeatureTable,
                  exercise: Optional[str]) -> FeatureTable:
    if exercise is not None:
        table = table.filter(exercise=Exercise(exercise))
    table = table.take(np.flatnonzero(table.labels >= 0))
    if not len(table):
        raise UsageError('no labeled repetitions to train on')
    return table


def _make_dirs(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise IoError('cannot create {}: {}'.format(path, e)) from e


def _out_dir(args, cfg: RunConfig) -> str:
    out = args.out or cfg.paths.models
    if not out:
        raise UsageError('{} needs --out (or paths.models)'.format(
            args.command))
    _make_dirs(out)
    return out


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == '-':
        sys.stdout.write(text)
        return
    try:
        with open(path, 'w') as f:
            f.write(text)
    except OSError as e:
        raise IoError('cannot write {}: {}'.format(path, e)) from e


def dumps_line(record: Dict[str, Any]) -> str:
    return json.dumps(convert(record), sort_keys=True,
                      separators=(',', ':')) + '\n'


def _save_network(path: str, model: MlpModel, names: Sequence[str],
                  norm: NormParams, extra: Dict[str, Any]) -> None:
    save_model(path, model.flat_params(), model.arch.to_dict(), names,
               obs_params=norm.to_dict(), extra=extra)


def _load_network(path: str, names: Sequence[str]
                  ) -> Tuple[MlpModel, NormParams, Dict[str, Any]]:
    data = load_model(path, feature_names=names)
    model = model_from_flat(Architecture.from_dict(data['architecture']),
                            data['params'])
    norm = NormParams.from_dict(data['obs_params'], names)
    return model, norm, data.get('extra', {})


# Subcommands.

def cmd_synth(args, cfg: RunConfig, logger) -> int:
    spec = cfg.corpus
    if args.spec:
        spec = build_section('corpus', CorpusSpec, load_yaml(args.spec))
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    ds = synth_dataset(spec)
    logger.info('Synthesized {0} repetitions of {1} subjects (seed={2})'
                .format(len(ds.repetitions), len(ds.subjects), spec.seed))
    _write_text(args.out or cfg.paths.corpus, serialize_dataset(ds))
    return 0


def cmd_extract(args, cfg: RunConfig, logger) -> int:
    corpus = args.input or cfg.paths.corpus
    if not corpus:
        raise UsageError('extract needs --in (or paths.corpus)')
    table = feature_table(parse_dataset(corpus), cfg.features,
                          threads=cfg.threads)
    logger.info('Extracted {0} features for {1} repetitions'.format(
        len(table.names), len(table)))
    out = args.out or cfg.paths.features
    if out is None or out == '-':
        table.to_frame().to_csv(sys.stdout, index=False, float_format='%.17g')
    else:
        table.to_csv(out)
    return 0


def cmd_train(args, cfg: RunConfig, logger) -> int:
    table = _labeled_rows(_load_table(args, cfg, logger), args.exercise)
    out = _out_dir(args, cfg)
    norm = fit_zscore_matrix(table.values, table.names)
    values = apply_zscore(norm, table.values)
    trainer = Trainer(cfg.train, threads=cfg.threads, logger=logger)
    model, report = trainer.fit(values, table.labels)
    best = report.best
    _save_network(os.path.join(out, PREDICTOR_FILE), model, table.names,
                  norm, {'learning_rate': best.learning_rate,
                         'val_f1': best.val_f1, 'target': 'overall'})
    reports = {'overall': report.to_dict()}
    if table.has_components:
        for i, component in enumerate(COMPONENTS):
            component_model, component_report = trainer.fit(
                values, table.components[:, i])
            _save_network(
                os.path.join(out, component_file(component)),
                component_model, table.names, norm,
                {'learning_rate': component_report.best.learning_rate,
                 'val_f1': component_report.best.val_f1,
                 'target': component})
            reports[component] = component_report.to_dict()
    write_json(os.path.join(out, GRID_REPORT_FILE), reports)
    logger.info('Saved predictors to {}'.format(out))
    return 0


def _predictor_arch(models_dir: Optional[str], names: Sequence[str],
                    values: np.ndarray, labels: np.ndarray,
                    cfg: RunConfig, logger) -> Tuple[Tuple[int, ...], float]:
    path = os.path.join(models_dir, PREDICTOR_FILE) if models_dir else None
    if path and os.path.exists(path):
        model, _, extra = _load_network(path, names)
        return model.arch.hidden_dims, float(extra['learning_rate'])
    best = Trainer(cfg.train, threads=cfg.threads,
                   logger=logger).search(values, labels).best
    return best.hidden_dims, best.learning_rate


def cmd_select(args, cfg: RunConfig, logger) -> int:
    table = _labeled_rows(_load_table(args, cfg, logger), args.exercise)
    out = _out_dir(args, cfg)
    norm = fit_zscore_matrix(table.values, table.names)
    values = apply_zscore(norm, table.values)
    hidden_dims, learning_rate = _predictor_arch(
        args.models or cfg.paths.models, table.names, values, table.labels,
        cfg, logger)

    selector = train_selector(values, table.labels, cfg.rl,
                              hidden_dims=hidden_dims, logger=logger)
    extra = {'rewards': dataclasses.asdict(selector.rewards)}
    _save_network(os.path.join(out, QNET_ONLINE_FILE), selector.online,
                  table.names, norm, extra)
    _save_network(os.path.join(out, QNET_TARGET_FILE), selector.target,
                  table.names, norm, extra)

    rfe = rfe_select(values, table.labels, cfg.train,
                     hidden_dims=hidden_dims, learning_rate=learning_rate,
                     logger=logger)
    write_json(os.path.join(out, RFE_FILE), rfe.to_dict(table.names))
    _save_network(os.path.join(out, RFE_MODEL_FILE), rfe.model, table.names,
                  norm, {'support': rfe.support})

    lines = []
    acquired = []
    for row in range(len(table)):
        fv = apply_zscore(norm, table.vector(row))
        _, _, trace = select_and_classify(
            selector, fv, int(table.labels[row]))
        record = trace.to_dict(table.names)
        record.update({'subject': table.subjects[row],
                       'exercise': table.exercises[row],
                       'side': table.sides[row],
                       'rep': int(table.reps[row])})
        acquired.append(trace.num_acquired)
        lines.append(record)
    _write_text(os.path.join(out, TRACES_FILE),
                ''.join(dumps_line(record) for record in lines))
    logger.info('Selector: mean acquired {0:.2f}/{1}; RFE subset {2}'.format(
        float(np.mean(acquired)), len(table.names), rfe.subset_size))
    return 0


def cmd_evaluate(args, cfg: RunConfig, logger) -> int:
    table = _load_table(args, cfg, logger)
    methods = args.methods.split(',') if args.methods else (
        cfg.evaluation.methods)
    exercises = cfg.evaluation.exercises
    if args.exercise:
        exercises = (args.exercise,)
    res = loso_evaluate(table, methods=methods, seeds=cfg.eval_seeds,
                        train_cfg=cfg.train, rl_cfg=cfg.rl,
                        exercises=exercises, threads=cfg.threads,
                        logger=logger)
    tp_path = args.tp_agreement or cfg.evaluation.tp_agreement
    tp = load_tp_agreement(tp_path) if tp_path else None
    out = args.out or (os.path.join(cfg.paths.outputs, 'results.json')
                       if cfg.paths.outputs else None)
    if out:
        _make_dirs(os.path.dirname(os.path.abspath(out)))
        _write_text(out, res.to_json())
    if args.format == 'json':
        sys.stdout.write(res.to_json())
    else:
        sys.stdout.write(emit_results_table(res, tp))
    return 0


def _train_for_feedback(table: FeatureTable, subject: str, exercise: Exercise,
                        cfg: RunConfig, use_selector: bool, logger):
    train = table.filter(exercise=exercise)
    train = train.take(np.flatnonzero(
        (train.subjects != subject) & (train.labels >= 0)))
    if not len(train):
        raise UsageError('no labeled repetitions of other subjects')
    norm = fit_zscore_matrix(train.values, train.names)
    values = apply_zscore(norm, train.values)
    trainer = Trainer(cfg.train, threads=cfg.threads, logger=logger)
    predictor, report = trainer.fit(values, train.labels)
    selector = None
    if use_selector:
        selector = train_selector(values, train.labels, cfg.rl,
                                  hidden_dims=report.best.hidden_dims,
                                  logger=logger)
    components = {}
    if train.has_components:
        for i, component in enumerate(COMPONENTS):
            components[component], _ = trainer.fit(
                values, train.components[:, i])
    return norm, predictor, selector, components


def _load_for_feedback(models_dir: str, names: Sequence[str],
                       use_selector: bool):
    predictor, norm, _ = _load_network(
        os.path.join(models_dir, PREDICTOR_FILE), names)
    selector = None
    if use_selector:
        online, _, extra = _load_network(
            os.path.join(models_dir, QNET_ONLINE_FILE), names)
        target, _, _ = _load_network(
            os.path.join(models_dir, QNET_TARGET_FILE), names)
        selector = SelectorModel(online=online, target=target,
                                 rewards=RewardSpec(**extra['rewards']))
    components = {}
    for component in COMPONENTS:
        path = os.path.join(models_dir, component_file(component))
        if os.path.exists(path):
            components[component], _, _ = _load_network(path, names)
    return norm, predictor, selector, components


def cmd_feedback(args, cfg: RunConfig, logger) -> int:
    table = _load_table(args, cfg, logger)
    if args.subject not in set(table.subjects.tolist()):
        raise UnknownSubject(args.subject)
    exercises = [e for e in Exercise if e.value in set(
        table.filter(subject_id=args.subject).exercises.tolist())]
    exercise = Exercise(args.exercise) if args.exercise else exercises[0]
    side = Side(args.side)
    try:
        row = table.row_index(args.subject, exercise, side, args.rep)
    except KeyError as e:
        raise UsageError(str(e.args[0]))

    use_selector = not args.all_features
    models_dir = args.models
    if models_dir:
        norm, predictor, selector, components = _load_for_feedback(
            models_dir, table.names, use_selector)
    else:
        norm, predictor, selector, components = _train_for_feedback(
            table, args.subject, exercise, cfg, use_selector, logger)

    raw = table.vector(row)
    fv = apply_zscore(norm, raw)
    if selector is not None:
        mask, _, _ = select_and_classify(selector, fv)
    else:
        mask = np.ones(len(table.names), dtype=np.int32)
    label, probability = predict(predictor, fv.with_mask(mask))
    component_labels = {c: predict(m, fv.with_mask(mask))[0]
                        for c, m in components.items()} or None

    profile = profile_for(table, args.subject, exercise, logger=logger)
    threshold = (args.threshold if args.threshold is not None
                 else cfg.feedback.threshold)
    templates = load_templates(args.templates or cfg.feedback.templates)
    report = generate_feedback(
        deviation_scores(profile, raw, mask), label, templates, threshold,
        probability=probability, components=component_labels,
        subject=args.subject,
        repetition='{}/{}/{}'.format(exercise.value, side.value, args.rep))
    text = report.to_json() if args.format == 'json' else (
        report.render_text())
    _write_text(args.out, text)
    return 0


COMMANDS = {
    'synth': cmd_synth,
    'extract': cmd_extract,
    'train': cmd_train,
    'select': cmd_select,
    'evaluate': cmd_evaluate,
    'feedback': cmd_feedback,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Run configuration (YAML or JSON).')
    common.add_argument('--seed', type=int, help='Run seed.')
    common.add_argument('--threads', type=int, help='Worker threads.')
    common.add_argument('--out', help='Output file or directory.')
    common.add_argument('--log-dir', help='Also log to a file here.')
    common.add_argument('--debug', action='store_true', help='Debug logs.')

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument('--in', dest='input', help='Corpus (JSON Lines).')
    inputs.add_argument('--features', help='Feature matrix (CSV).')
    inputs.add_argument('--exercise', choices=[e.value for e in Exercise])

    parser = argparse.ArgumentParser(
        prog='rehab-assess',
        description='Rehabilitation exercise quality assessment.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('synth', parents=[common],
                       help='Generate a synthetic motion corpus.')
    p.add_argument('--spec', help='Corpus spec (YAML or JSON).')

    p = sub.add_parser('extract', parents=[common],
                       help='Extract kinematic features to CSV.')
    p.add_argument('--in', dest='input', help='Corpus (JSON Lines).')

    sub.add_parser('train', parents=[common, inputs],
                   help='Grid-search and save quality predictors.')

    p = sub.add_parser('select', parents=[common, inputs],
                       help='Train the feature selector and RFE baseline.')
    p.add_argument('--models', help='Directory with predictor.json.')

    p = sub.add_parser('evaluate', parents=[common, inputs],
                       help='Leave-one-subject-out evaluation.')
    p.add_argument('--methods', help='Comma-separated: RL,RFE,FullNN.')
    p.add_argument('--tp-agreement', help='Therapist agreement JSON.')
    p.add_argument('--format', choices=('text', 'json'), default='text')

    p = sub.add_parser('feedback', parents=[common, inputs],
                       help='Corrective feedback for one repetition.')
    p.add_argument('--subject', required=True)
    p.add_argument('--rep', type=int, required=True)
    p.add_argument('--side', choices=[s.value for s in Side],
                   default=Side.AFFECTED.value)
    p.add_argument('--models', help='Directory with trained checkpoints.')
    p.add_argument('--all-features', action='store_true',
                   help='Skip feature selection.')
    p.add_argument('--threshold', type=float)
    p.add_argument('--templates', help='Feedback templates (YAML).')
    p.add_argument('--format', choices=('text', 'json'), default='text')
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    logger = create_logger(name='rehab-assess', log_dir=args.log_dir,
                           debug=args.debug)
    try:
        cfg = load_run_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError('--threads must be at least 1')
            cfg = cfg.with_threads(args.threads)
        return COMMANDS[args.command](args, cfg, logger)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write('rehab-assess: error: {}\n'.format(e))
        return 2
    except ConfigError as e:
        sys.stderr.write('error [config]: {}\n'.format(e))
        return 1
    except RehabError as e:
        sys.stderr.write('error [{}]: {}\n'.format(error_stage(e), e))
        return 1


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
