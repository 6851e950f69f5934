"""Parallel orchestration: bank fragments, query splitting, worker pools.

A formatted bank is one or more fragments, each with its own index.
Sequences are assigned to fragments greedily by base balance, and a
manifest maps (fragment, local id) pairs back to global sequence ids,
so search results are independent of the fragment count.

A search fans out one index-scan task per (fragment, sub-input) pair.
All tasks deposit their hits into one shared collection; the hits are
then recombined into exactly the per-sequence order the sequential
pipeline sees, so any (fragments, splits, workers) configuration yields
identical results.  Extension and alignment work items go through a
FIFO queue drained by a pool of worker threads; the compiled kernels
release the GIL, so the pool scales across cores.
"""

from __future__ import annotations

import json
import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from . import search as phases
from .align import AlignmentResult, align_hsp
from .databank import Bank, BankMeta, SequenceInfo, load_bank, write_bank
from .encoding import SpacedSeedMask, text_to_codes
from .errors import (
    CorruptionError,
    IngestError,
    ParameterError,
    ProvenanceError,
    QueryTooShortError,
)
from .fasta import read_fasta
from .index import InvertedIndex, build_index, load_index, save_index
from .model import (
    HSP,
    EngineConfig,
    Hit,
    ScoredHSP,
    SearchParams,
    SearchResult,
)

MANIFEST_VERSION = 1


@dataclass
class Fragment:
    bank: Bank
    index: InvertedIndex
    global_ids: np.ndarray  # int64, local seq id -> global seq id


@dataclass(frozen=True)
class WorkItem:
    """One HSP plus access to the sequence data its worker needs."""

    order: int
    hsp: HSP
    query_codes: np.ndarray
    get_bank_codes: object  # callable(seq_id) -> codes, shared cache


def split_query(query, k: int, m: int) -> list[tuple[int, object]]:
    """Cut a query into k near-equal pieces overlapping by m-1 bases.

    The union of length-m windows over the pieces equals the windows of
    the whole query; each piece carries its absolute offset.  Falls back
    to fewer pieces when the query is too short to split k ways.
    """
    if k < 1:
        raise ParameterError("split count must be >= 1")
    n = len(query)
    if n < m:
        raise QueryTooShortError(f"query of {n} bases shorter than window length {m}")
    windows = n - m + 1
    k = min(k, windows)
    bounds = [i * windows // k for i in range(k + 1)]
    return [
        (bounds[i], query[bounds[i] : bounds[i + 1] - 1 + m]) for i in range(k)
    ]


def fragment_bank(
    fasta_source,
    fragments: int,
    mask: SpacedSeedMask,
    output_dir,
    bank_name: str,
) -> "FragmentSet":
    """Format a FASTA source into `fragments` banks plus their indexes.

    Sequences go to the currently lightest fragment (by total bases), so
    fragment sizes differ by at most the largest single sequence.
    """
    if fragments < 1:
        raise ParameterError("fragment count must be >= 1")
    records = []
    for rec in read_fasta(fasta_source):
        try:
            codes = text_to_codes(rec.sequence)
        except Exception as exc:
            raise IngestError(f"record {rec.name!r}: {exc}") from exc
        records.append((rec.name, rec.description, codes))
    if not records:
        raise IngestError("FASTA input holds no records")

    totals = [0] * fragments
    members: list[list[int]] = [[] for _ in range(fragments)]
    for gid, (_, _, codes) in enumerate(records):
        target = totals.index(min(totals))
        members[target].append(gid)
        totals[target] += codes.shape[0]

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    metas: list[BankMeta] = []
    parts = []
    for i in range(fragments):
        frag_records = [records[g] for g in members[i]]
        bank_path = out / f"{bank_name}.f{i}.gndb"
        index_path = out / f"{bank_name}.f{i}.gnix"
        meta = write_bank(frag_records, f"{bank_name}.f{i}", mask, bank_path)
        bank = load_bank(bank_path)
        try:
            idx = build_index(bank, mask)
        finally:
            bank.close()
        save_index(idx, index_path)
        metas.append(meta)
        parts.append(
            {
                "bank": bank_path.name,
                "index": index_path.name,
                "global_ids": members[i],
            }
        )

    manifest_path = out / f"{bank_name}.manifest"
    manifest = {
        "format": "genoogle-fragments",
        "version": MANIFEST_VERSION,
        "name": bank_name,
        "mask": mask.pattern,
        "fragments": fragments,
        "sequence_count": len(records),
        "total_bases": sum(c.shape[0] for _, _, c in records),
        "parts": parts,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return FragmentSet(bank_name, mask, manifest_path, metas)


@dataclass
class FragmentSet:
    name: str
    mask: SpacedSeedMask
    manifest_path: Path
    metas: list[BankMeta]


class Engine:
    """Loaded fragments ready to answer searches."""

    def __init__(self, name: str, mask: SpacedSeedMask, fragments: list[Fragment]):
        self.name = name
        self.mask = mask
        self.fragments = fragments
        for frag in fragments:
            if frag.bank.meta.mask_pattern != mask.pattern:
                raise ProvenanceError(
                    f"bank {frag.bank.meta.bank_name!r} mask differs from engine mask"
                )
            if frag.index.mask_pattern != frag.bank.meta.mask_pattern:
                raise ProvenanceError(
                    f"index mask {frag.index.mask_pattern!r} does not match "
                    f"bank mask {frag.bank.meta.mask_pattern!r}"
                )
            if frag.index.bank_name != frag.bank.meta.bank_name:
                raise ProvenanceError(
                    f"index was built for bank {frag.index.bank_name!r}, "
                    f"not {frag.bank.meta.bank_name!r}"
                )
        self.total_bases = sum(f.bank.meta.total_bases for f in fragments)
        self.sequence_count = sum(f.bank.sequence_count for f in fragments)
        self._frag_of = np.full(self.sequence_count, -1, dtype=np.int32)
        self._local_of = np.zeros(self.sequence_count, dtype=np.int64)
        for fi, frag in enumerate(fragments):
            gids = frag.global_ids
            if gids.shape[0] != frag.bank.sequence_count:
                raise CorruptionError("manifest id table disagrees with bank")
            self._frag_of[gids] = fi
            self._local_of[gids] = np.arange(gids.shape[0], dtype=np.int64)
        if (self._frag_of < 0).any():
            raise CorruptionError("manifest does not cover every sequence id")
        self._mask_pos = mask.positions_array()

    # -- loading ---------------------------------------------------------

    @classmethod
    def open(cls, manifest_path) -> "Engine":
        manifest_path = Path(manifest_path)
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        if manifest.get("format") != "genoogle-fragments":
            raise CorruptionError(f"{manifest_path}: not a fragment manifest")
        mask = SpacedSeedMask(manifest["mask"])
        fragments = []
        for part in manifest["parts"]:
            bank = load_bank(manifest_path.parent / part["bank"])
            idx = load_index(manifest_path.parent / part["index"])
            fragments.append(
                Fragment(bank, idx, np.array(part["global_ids"], dtype=np.int64))
            )
        return cls(manifest["name"], mask, fragments)

    @classmethod
    def from_single(cls, bank: Bank, index: InvertedIndex) -> "Engine":
        gids = np.arange(bank.sequence_count, dtype=np.int64)
        return cls(
            bank.meta.bank_name, bank.mask, [Fragment(bank, index, gids)]
        )

    def close(self):
        for frag in self.fragments:
            frag.bank.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- sequence access -------------------------------------------------

    def global_info(self, gid: int) -> SequenceInfo:
        frag = self.fragments[int(self._frag_of[gid])]
        info = frag.bank.info(int(self._local_of[gid]))
        return SequenceInfo(
            seq_id=gid,
            name=info.name,
            description=info.description,
            length=info.length,
            payload_offset=info.payload_offset,
        )

    def _codes_cache(self):
        cache: dict[int, np.ndarray] = {}
        lock = threading.Lock()

        def get(gid: int) -> np.ndarray:
            with lock:
                codes = cache.get(gid)
            if codes is None:
                frag = self.fragments[int(self._frag_of[gid])]
                codes = frag.bank.get_codes(int(self._local_of[gid]))
                with lock:
                    cache[gid] = codes
            return codes

        return get

    # -- pipeline pieces shared by both search modes ----------------------

    def _scan_task(self, frag: Fragment, codes: np.ndarray, offset: int):
        """Index scan of one sub-input against one fragment.

        Returns hits as (global seq id, bank pos, absolute query pos)
        int64 arrays.
        """
        seqs, bpos, qpos = kernels.seed_hits(
            codes,
            offset,
            self._mask_pos,
            self.mask.length,
            frag.index.offsets,
            frag.index.entry_seq,
            frag.index.entry_pos,
        )
        return (
            frag.global_ids[seqs.astype(np.int64)],
            bpos.astype(np.int64),
            qpos.astype(np.int64),
        )

    def _hits_to_hsps(self, parts, params: SearchParams) -> list[HSP]:
        """Shared-collection recombination: sort hits exactly as the
        sequential pipeline orders them, then chain and length-filter."""
        seqs = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, np.int64)
        if seqs.shape[0] == 0:
            return []
        bpos = np.concatenate([p[1] for p in parts])
        qpos = np.concatenate([p[2] for p in parts])
        key = (seqs.astype(np.uint64) << np.uint64(32)) | bpos.astype(np.uint64)
        order = np.argsort(key, kind="stable")
        s, qs, qe, bs, be = kernels.chain_areas(
            seqs[order],
            bpos[order],
            qpos[order],
            params.max_entry_distance,
            self.mask.length,
        )
        # length filter in array space; chains far outnumber survivors
        keep = np.nonzero(
            np.minimum(qe - qs, be - bs) >= params.min_hsp_length
        )[0]
        return [
            HSP(int(s[i]), int(qs[i]), int(qe[i]), int(bs[i]), int(be[i]))
            for i in keep
        ]

    def _finish(
        self,
        hsps: list[HSP],
        query_codes: np.ndarray,
        query_id: str,
        params: SearchParams,
        workers: int | None,
        stats: dict | None,
    ) -> SearchResult:
        """Extension, overlap merge, selection, alignment, scoring."""
        get_codes = self._codes_cache()

        def align_item(item: WorkItem) -> AlignmentResult:
            bank_codes = item.get_bank_codes(item.hsp.seq_id)
            return align_hsp(item.query_codes, bank_codes, item.hsp, params)

        extended = _extend_hsps(hsps, query_codes, get_codes, params, workers, stats)

        by_seq: dict[int, list[HSP]] = {}
        for h in extended:
            by_seq.setdefault(h.seq_id, []).append(h)
        merged: list[HSP] = []
        for sid in sorted(by_seq):
            merged.extend(phases.merge_overlapping(by_seq[sid]))
        selected = phases.select_top(merged, params)

        items = [
            WorkItem(i, h, query_codes, get_codes) for i, h in enumerate(selected)
        ]
        alignments = _run_work_queue(items, align_item, workers, stats, "align")

        scored = []
        for hsp, aln in zip(selected, alignments):
            bit_score, e_value = phases.score_hsp(
                aln.score, query_codes.shape[0], self.total_bases, params
            )
            scored.append(
                ScoredHSP(
                    seq_id=hsp.seq_id,
                    query_start=aln.a_start,
                    query_end=aln.a_end,
                    bank_start=aln.b_start,
                    bank_end=aln.b_end,
                    score=aln.score,
                    bit_score=bit_score,
                    e_value=e_value,
                    aligned_query=aln.aligned_a,
                    midline=aln.midline,
                    aligned_bank=aln.aligned_b,
                )
            )
        scored.sort(key=ScoredHSP.sort_key)

        hits: list[Hit] = []
        grouped: dict[int, list[ScoredHSP]] = {}
        seq_order: list[int] = []
        for sh in scored:
            if sh.seq_id not in grouped:
                grouped[sh.seq_id] = []
                seq_order.append(sh.seq_id)
            grouped[sh.seq_id].append(sh)
        for sid in seq_order:
            info = self.global_info(sid)
            hits.append(Hit(sid, info.name, info.description, tuple(grouped[sid])))
        return SearchResult(self.name, query_id, params, tuple(hits))

    # -- public search modes ----------------------------------------------

    def _prepare(self, query, params: SearchParams | None):
        params = params if params is not None else SearchParams()
        params.validate_for_mask(self.mask)
        codes = query if isinstance(query, np.ndarray) else text_to_codes(query)
        if codes.shape[0] < self.mask.length:
            raise QueryTooShortError(
                f"query of {codes.shape[0]} bases shorter than window length "
                f"{self.mask.length}"
            )
        return codes, params

    def search(
        self, query, params: SearchParams | None = None, query_id: str = "query"
    ) -> SearchResult:
        """The sequential pipeline: one worker, fragments scanned in order."""
        query_codes, params = self._prepare(query, params)
        parts = [
            self._scan_task(frag, query_codes, 0) for frag in self.fragments
        ]
        hsps = self._hits_to_hsps(parts, params)
        return self._finish(hsps, query_codes, query_id, params, None, None)

    def parallel_search(
        self,
        query,
        params: SearchParams | None = None,
        config: EngineConfig | None = None,
        query_id: str = "query",
        stats: dict | None = None,
    ) -> SearchResult:
        """Concurrent scan tasks plus an extend/align worker pool.

        Produces exactly the sequential result for any configuration.
        Any task failure aborts the whole search with the first error.
        """
        query_codes, params = self._prepare(query, params)
        config = config if config is not None else EngineConfig()
        if stats is not None:
            stats.update(
                index_tasks=0,
                extend_enqueued=0,
                extend_processed=0,
                align_enqueued=0,
                align_processed=0,
            )

        sub_inputs = split_query(query_codes, config.query_splits, self.mask.length)
        tasks = [
            (frag, codes, offset)
            for frag in self.fragments
            for offset, codes in sub_inputs
        ]
        if stats is not None:
            stats["index_tasks"] = len(tasks)
        with ThreadPoolExecutor(max_workers=len(tasks)) as pool:
            futures = [
                pool.submit(self._scan_task, frag, codes, offset)
                for frag, codes, offset in tasks
            ]
            parts = [f.result() for f in futures]

        hsps = self._hits_to_hsps(parts, params)
        return self._finish(
            hsps, query_codes, query_id, params, config.align_workers, stats
        )


def _extend_hsps(hsps, query_codes, get_codes, params, workers, stats):
    """Extension stage.

    Extension of one HSP costs microseconds, so per-HSP queue items
    would drown in dispatch overhead; workers pull contiguous chunks
    instead and write into disjoint slices of the result list.
    """
    if not hsps:
        return []
    if stats is not None:
        stats["extend_enqueued"] += len(hsps)

    def extend_one(h: HSP) -> HSP:
        return phases.extend_hsp(query_codes, get_codes(h.seq_id), h, params)

    if workers is None or workers <= 1 or len(hsps) < 2:
        out = []
        for h in hsps:
            out.append(extend_one(h))
            if stats is not None:
                stats["extend_processed"] += 1
        return out

    chunk = max(1, len(hsps) // (workers * 8))
    fifo: queue.SimpleQueue = queue.SimpleQueue()
    for start in range(0, len(hsps), chunk):
        fifo.put((start, hsps[start : start + chunk]))
    results: list = [None] * len(hsps)
    errors: list[BaseException] = []
    lock = threading.Lock()

    def worker():
        while not errors:
            try:
                start, group = fifo.get_nowait()
            except queue.Empty:
                return
            try:
                for i, h in enumerate(group):
                    results[start + i] = extend_one(h)
            except BaseException as exc:
                with lock:
                    errors.append(exc)
                return
            if stats is not None:
                with lock:
                    stats["extend_processed"] += len(group)

    threads = [
        threading.Thread(target=worker, name=f"genoogle-extend-{i}")
        for i in range(workers)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return results


def _run_work_queue(items, fn, workers, stats, stage):
    """Drain `items` through a FIFO queue with `workers` threads.

    With workers=None the items run inline on the calling thread.  The
    first worker error aborts the stage and is re-raised; results come
    back in item order either way.
    """
    if not items:
        return []
    if stats is not None:
        stats[f"{stage}_enqueued"] += len(items)

    if workers is None or workers <= 1 or len(items) == 1:
        results = []
        for item in items:
            results.append(fn(item))
            if stats is not None:
                stats[f"{stage}_processed"] += 1
        return results

    fifo: queue.SimpleQueue = queue.SimpleQueue()
    for item in items:
        fifo.put(item)
    results: list = [None] * len(items)
    errors: list[BaseException] = []
    lock = threading.Lock()

    def worker():
        while not errors:
            try:
                item = fifo.get_nowait()
            except queue.Empty:
                return
            try:
                out = fn(item)
            except BaseException as exc:
                with lock:
                    errors.append(exc)
                return
            results[item.order] = out
            if stats is not None:
                with lock:
                    stats[f"{stage}_processed"] += 1

    threads = [
        threading.Thread(target=worker, name=f"genoogle-{stage}-{i}")
        for i in range(min(workers, len(items)))
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return results


def parallel_search(
    engine: Engine,
    query,
    params: SearchParams | None = None,
    config: EngineConfig | None = None,
    query_id: str = "query",
    stats: dict | None = None,
) -> SearchResult:
    return engine.parallel_search(query, params, config, query_id, stats)
