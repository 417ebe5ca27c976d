"""End-to-end corpus build over a directory of TEI files.

Output layout under the output directory::

    paula/<doc>/<doc>.<layer>.xml
    laula/<doc>/<doc>.<layer>.xml
    stats.txt           corpus counts, "key = value" per line
    normalization.txt   summed encoding-normalization report

Each document is built completely in memory and written to a scratch
directory first; only a fully written file set is moved into place.
"""

import logging
import shutil
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from lxml import etree

from .cts import assign_citations, parse_scheme
from .errors import ConfigError, InvalidGraph, MissingFile, NoCtsDeclaration, StandoffError
from .graph import SENTENCE_LAYER, TOKEN_LAYER, AnnotationGraph, FeatureLayer, MarkLayer
from .morphosyntax import align, read_external
from .normalize import ElisionLexicon, NormalizationReport
from .segment import segment, sentence_members
from .serialize.common import ANNO, file_name
from .serialize.laula import E, laula_files, read_laula
from .serialize.paula import paula_files, read_paula
from .tei import ElementPolicy, document_id_from_path, extract_normalized, parse_tei
from .tokens import CrasisLexicon, detect_crasis_candidates, tokenize

log = logging.getLogger(__name__)

FORMATS = ("paula", "laula")
STATS_FILE = "stats.txt"
NORMALIZATION_FILE = "normalization.txt"
SCRATCH = ".scratch"


@dataclass
class PipelineConfig:
    input_dir: Path
    output_dir: Path
    policy_path: Optional[Path] = None
    elision_path: Optional[Path] = None
    crasis_path: Optional[Path] = None
    external_dir: Optional[Path] = None
    formats: tuple = FORMATS
    strict: bool = False
    workers: int = 1

    def check(self):
        if not Path(self.input_dir).is_dir():
            raise ConfigError(f"input directory {self.input_dir} does not exist")
        for label in ("policy_path", "elision_path", "crasis_path"):
            value = getattr(self, label)
            if value is not None and not Path(value).is_file():
                raise ConfigError(f"{label.replace('_', ' ')} {value} is not a readable file")
        if self.external_dir is not None and not Path(self.external_dir).is_dir():
            raise ConfigError(f"external annotation directory {self.external_dir} does not exist")
        unknown = set(self.formats) - set(FORMATS)
        if unknown or not self.formats:
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}, got {self.formats}")
        if int(self.workers) < 1:
            raise ConfigError("worker count must be at least 1")
        return self


@dataclass(frozen=True)
class Resources:
    """Read-only lexicons and policy shared by every document."""

    policy: ElementPolicy
    elision: ElisionLexicon
    crasis: CrasisLexicon

    @classmethod
    def load(cls, config=None):
        return cls(
            ElementPolicy.load(config.policy_path) if config and config.policy_path else ElementPolicy.default(),
            ElisionLexicon.load(config.elision_path) if config and config.elision_path else ElisionLexicon.default(),
            CrasisLexicon.load(config.crasis_path) if config and config.crasis_path else CrasisLexicon.default(),
        )


@dataclass
class CorpusStats:
    processed: int = 0
    rejected: int = 0
    tokens: int = 0
    sentences: int = 0
    errors: Counter = field(default_factory=Counter)

    @property
    def documents(self):
        return self.processed + self.rejected

    def to_text(self):
        lines = [
            f"documents = {self.documents}",
            f"processed = {self.processed}",
            f"rejected = {self.rejected}",
            f"tokens = {self.tokens}",
            f"sentences = {self.sentences}",
        ]
        lines += [f"error.{name} = {n}" for name, n in sorted(self.errors.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        stats = cls()
        for line in text.splitlines():
            key, sep, value = line.partition("=")
            if not sep:
                continue
            key, value = key.strip(), int(value)
            if key.startswith("error."):
                stats.errors[key[6:]] = value
            elif key in ("processed", "rejected", "tokens", "sentences"):
                setattr(stats, key, value)
        return stats


def build_graph(tree, document_id, resources):
    """Run extraction through CTS tagging on one parsed document.

    Returns ``(graph, normalization_report)``; raises NoCtsDeclaration for
    documents without a CTS reference declaration.
    """
    scheme = parse_scheme(tree, document_id)
    base, report = extract_normalized(tree, resources.policy, resources.elision, document_id)
    tokens = tokenize(base, resources.crasis)
    sentences = segment(tokens)
    citations = assign_citations(base, tokens, scheme, tree)
    graph = AnnotationGraph(base)
    graph.add_layer(MarkLayer(TOKEN_LAYER, {t.id: (t.start, t.length) for t in tokens}))
    graph.add_layer(
        MarkLayer(
            SENTENCE_LAYER,
            {s.id: tuple(ids) for s, ids in zip(sentences, sentence_members(sentences, tokens))},
            TOKEN_LAYER,
        )
    )
    graph.add_layer(FeatureLayer("form", TOKEN_LAYER, {t.id: t.form for t in tokens if t.form != t.surface}))
    graph.add_layer(FeatureLayer("cts", TOKEN_LAYER, {t.id: str(citations[t.id]) for t in tokens}))
    return graph, report


@dataclass
class DocumentResult:
    path: str
    document_id: str
    status: str  # "processed" or "rejected"
    tokens: int = 0
    sentences: int = 0
    error: Optional[str] = None
    message: str = ""
    report: NormalizationReport = field(default_factory=NormalizationReport)


def _install(scratch, target):
    if target.exists():
        shutil.rmtree(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    scratch.rename(target)


def process_document(path, config, resources):
    path = Path(path)
    doc = document_id_from_path(path)
    started = time.perf_counter()
    scratch = Path(config.output_dir) / SCRATCH / doc
    try:
        tree = parse_tei(path)
        graph, report = build_graph(tree, doc, resources)
        if config.external_dir is not None:
            ext = Path(config.external_dir) / f"{doc}.tsv"
            if ext.is_file():
                align(graph, read_external(ext), strict=config.strict)
        violations = graph.validate()
        if violations:
            raise InvalidGraph(violations)
        rendered = {}
        if "paula" in config.formats:
            rendered["paula"] = paula_files(graph, check=False)
        if "laula" in config.formats:
            rendered["laula"] = laula_files(graph, tree, check=False)
        if scratch.exists():
            shutil.rmtree(scratch)
        for fmt, files in rendered.items():
            (scratch / fmt).mkdir(parents=True)
            for name, content in files:
                (scratch / fmt / name).write_bytes(content.encode("utf-8"))
        for fmt in rendered:
            _install(scratch / fmt, Path(config.output_dir) / fmt / doc)
        shutil.rmtree(scratch, ignore_errors=True)
        result = DocumentResult(
            str(path), doc, "processed",
            tokens=len(graph[TOKEN_LAYER].marks), sentences=len(graph[SENTENCE_LAYER].marks), report=report,
        )
    except (StandoffError, etree.XMLSyntaxError, OSError) as e:
        shutil.rmtree(scratch, ignore_errors=True)
        result = DocumentResult(str(path), doc, "rejected", error=type(e).__name__, message=str(e))
    elapsed = time.perf_counter() - started
    log.info(
        "doc=%s status=%s tokens=%d sentences=%d error=%s seconds=%.3f",
        doc, result.status, result.tokens, result.sentences, result.error or "-", elapsed,
    )
    if result.status == "rejected" and result.error != NoCtsDeclaration.__name__:
        log.warning("doc=%s %s: %s", doc, result.error, result.message)
    return result


_worker_state = {}


def _init_worker(config, resources):
    _worker_state["config"] = config
    _worker_state["resources"] = resources


def _work(path):
    return process_document(path, _worker_state["config"], _worker_state["resources"])


def input_files(input_dir):
    return sorted(p for p in Path(input_dir).iterdir() if p.is_file() and p.suffix.lower() == ".xml")


def run(config):
    """Build the corpus described by `config`; returns :class:`CorpusStats`."""
    config.check()
    resources = Resources.load(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = input_files(config.input_dir)
    workers = int(config.workers)
    if workers == 1 or len(files) < 2:
        results = [process_document(p, config, resources) for p in files]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(config, resources)) as pool:
            results = list(pool.map(_work, files))
    shutil.rmtree(out / SCRATCH, ignore_errors=True)

    stats = CorpusStats()
    report = NormalizationReport()
    for r in results:
        if r.status == "processed":
            stats.processed += 1
            stats.tokens += r.tokens
            stats.sentences += r.sentences
            report.merge(r.report)
        else:
            stats.rejected += 1
            stats.errors[r.error] += 1
    (out / STATS_FILE).write_text(stats.to_text(), encoding="utf-8")
    (out / NORMALIZATION_FILE).write_text(report.to_text(), encoding="utf-8")
    return stats


def _count(path, tag):
    if not path.is_file():
        raise MissingFile(str(path))
    return sum(1 for _ in etree.iterparse(str(path), tag=tag))


def stats(output_dir):
    """Recount an emitted corpus from its serialized layers."""
    out = Path(output_dir)
    recorded = CorpusStats.from_text((out / STATS_FILE).read_text("utf-8")) if (out / STATS_FILE).is_file() else None
    docs = {}
    for fmt in FORMATS:
        if (out / fmt).is_dir():
            for d in sorted((out / fmt).iterdir()):
                if d.is_dir():
                    docs.setdefault(d.name, set()).add(fmt)
    result = CorpusStats()
    sentences_known = True
    for doc, fmts in sorted(docs.items()):
        result.processed += 1
        if "laula" in fmts:
            d = out / "laula" / doc
            if not (d / file_name(doc, ANNO)).is_file():
                raise MissingFile(str(d / file_name(doc, ANNO)))
            result.tokens += _count(d / file_name(doc, TOKEN_LAYER), E["mark"])
            result.sentences += _count(d / file_name(doc, SENTENCE_LAYER), E["mark"])
        else:
            d = out / "paula" / doc
            result.tokens += _count(d / file_name(doc, TOKEN_LAYER), "mark")
            sentences_known = False
    if recorded is not None:
        result.rejected = recorded.rejected
        result.errors = recorded.errors
        if not sentences_known:
            # PAULA sets carry no sentence layer
            result.sentences = recorded.sentences
    return result


def validate_output(output_dir, input_dir, resources=None):
    """Re-read every emitted file set and validate it; returns {document: [problems]}."""
    resources = resources or Resources.load()
    out = Path(output_dir)
    problems = {}
    sources = {document_id_from_path(p): p for p in input_files(input_dir)} if input_dir else {}
    for fmt in FORMATS:
        if not (out / fmt).is_dir():
            continue
        for d in sorted((out / fmt).iterdir()):
            if not d.is_dir():
                continue
            found = []
            try:
                if fmt == "paula":
                    graph = read_paula(d, d.name)
                else:
                    if d.name not in sources:
                        raise MissingFile(f"no source TEI for {d.name} in {input_dir}")
                    graph = read_laula(d, sources[d.name], resources.policy, resources.elision, d.name)
                found = [str(v) for v in graph.validate()]
            except StandoffError as e:
                found = [f"{type(e).__name__}: {e}"]
            if found:
                problems[f"{fmt}/{d.name}"] = found
    return problems


def detect_crasis(input_dir, resources=None):
    """Count coronis-bearing words over a TEI directory, regardless of CTS compliance."""
    resources = resources or Resources.load()
    counts = Counter()
    for path in input_files(input_dir):
        try:
            tree = parse_tei(path)
            base, _ = extract_normalized(tree, resources.policy, resources.elision, document_id_from_path(path))
        except (StandoffError, etree.XMLSyntaxError) as e:
            log.warning("skipping %s: %s", path.name, e)
            continue
        counts.update(detect_crasis_candidates(base))
    return counts
