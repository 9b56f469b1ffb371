"""Command-line pipeline: keygen, campaign, analyze, graft, seek, forge, verify.

Every artifact is a JSON-lines file.  Exit codes: 0 success, 1 negative
result (empty report, rejected signature, search budget exhausted),
2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from .complexity import rank_instances
from .core import KeyPair, decode_signature, encode_signature, slh_keygen, slh_verify
from .errors import BudgetExceeded, EmptyReport, FormatError, NotCompromised, NotFound
from .fault import CampaignConfig, Corpus, FaultSpec, derive_seed, load_corpus, save_corpus, simulated_campaign
from .forgery import (
    DIRECT,
    SEARCH,
    GraftResult,
    InstanceAddress,
    PathSeekResult,
    extract_observations,
    find_compromised,
    forge,
    graft_search,
    path_seek,
)
from .params import parameter_set

log = logging.getLogger("slhfault")

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# artifact helpers


def _read_rows(path) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not a JSON-lines file ({exc.msg})") from None


def _write_rows(path, rows) -> None:
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _row(rows, kind, path) -> dict:
    for r in rows:
        if r.get("kind") == kind:
            return r
    raise UsageError(f"{path}: no {kind!r} record")


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _record_stage(args, stage: str, seed, inputs, output) -> None:
    """Append the stage's seed and input/output digests to the session manifest."""
    if not getattr(args, "manifest", None):
        return
    path = Path(args.manifest)
    manifest = json.loads(path.read_text()) if path.exists() else {"stages": {}}
    entry = {"inputs": {str(p): _digest(p) for p in inputs if p}}
    if seed is not None:
        entry["session_seed"] = args.seed
        entry["stage_seed"] = seed
    if output and str(output) != "-":
        entry["output"] = str(output)
        entry["output_sha256"] = _digest(output)
    manifest["stages"][stage] = entry
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_key(path) -> tuple[str, KeyPair]:
    row = _row(_read_rows(path), "key", path)
    try:
        name = parameter_set(row["param_set"]).name
        keypair = KeyPair(*(bytes.fromhex(row[k]) for k in ("sk_seed_hex", "sk_prf_hex", "pk_seed_hex", "pk_root_hex")))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: bad key file ({exc})") from None
    return name, keypair


def _load_corpus(path) -> Corpus:
    try:
        return load_corpus(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _message(args) -> bytes:
    if getattr(args, "message_hex", None):
        try:
            return bytes.fromhex(args.message_hex)
        except ValueError:
            raise UsageError("--message-hex is not hex") from None
    if args.message is None:
        raise UsageError("a message is required (--message or --message-hex)")
    return args.message.encode()


def _instances(corpus: Corpus, mode: str):
    params = corpus.params
    extraction = extract_observations(corpus)
    return find_compromised(extraction, params, corpus.pk_seed, mode)


def _instance_at(corpus: Corpus, address: InstanceAddress, mode: str):
    for inst in _instances(corpus, mode):
        if inst.address == address:
            return inst
    raise UsageError(f"instance {address} is not compromised in this corpus")


# ---------------------------------------------------------------------------
# subcommands


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"{args.command} needs --{name.replace('_', '-')}")


def cmd_keygen(args) -> int:
    _need(args, "param_set")
    params = parameter_set(args.param_set)
    keypair = slh_keygen(params, str(args.seed).encode())
    row = {
        "kind": "key",
        "param_set": params.name,
        "sk_seed_hex": keypair.sk_seed.hex(),
        "sk_prf_hex": keypair.sk_prf.hex(),
        "pk_seed_hex": keypair.pk_seed.hex(),
        "pk_root_hex": keypair.pk_root.hex(),
    }
    _write_rows(args.out, [row])
    _record_stage(args, "keygen", None, [], args.out)
    return EXIT_OK


def cmd_campaign(args) -> int:
    _need(args, "key")
    name, keypair = _load_key(args.key)
    if args.param_set and parameter_set(args.param_set).name != name:
        raise UsageError(f"--param-set {args.param_set} does not match key ({name})")
    try:
        fault = FaultSpec.parse(args.fault) if args.fault else None
    except ValueError as exc:
        raise UsageError(f"bad --fault: {exc}") from None
    seed = derive_seed(args.seed, "campaign")
    config = CampaignConfig(
        param_set=name,
        mode=args.mode,
        message_policy=args.message_policy,
        message=args.message.encode() if args.message is not None else CampaignConfig.message,
        fault=fault,
        count=args.count,
        seed=seed,
        out=args.out,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    corpus = simulated_campaign(config, keypair)
    if args.out is None or str(args.out) == "-":
        save_corpus(corpus, sys.stdout)
    else:
        save_corpus(corpus, args.out)
    _record_stage(args, "campaign", seed, [args.key], args.out)
    rejecting = sum(not slh_verify(corpus.params, r.message, r.signature, keypair.pk_seed, keypair.pk_root) for r in corpus.records)
    log.info("%d records, %d rejecting", len(corpus.records), rejecting)
    return EXIT_OK if corpus.complete else EXIT_NEGATIVE


def cmd_analyze(args) -> int:
    corpus = _load_corpus(args.corpus)
    params = corpus.params
    try:
        report = rank_instances(_instances(corpus, args.identify), params)
    except EmptyReport as exc:
        print(f"no compromised instance: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    if args.json:
        rows = [{"kind": "report", "param_set": params.name, "hashes_per_tree": report.hashes_per_tree}]
        rows += [dict(row.to_dict(), rank=rank) for rank, row in enumerate(report.rows)]
        _write_rows(args.out, rows)
    else:
        text = report.render() + "\n"
        if args.out and str(args.out) != "-":
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    _record_stage(args, "analyze", None, [args.corpus], args.out)
    return EXIT_OK


def cmd_graft(args) -> int:
    corpus = _load_corpus(args.corpus)
    params = corpus.params
    candidates = [i for i in _instances(corpus, args.identify) if i.layer >= 1]
    try:
        report = rank_instances(candidates, params)
    except EmptyReport as exc:
        print(f"nothing to graft onto: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    if not 0 <= args.rank < len(report.rows):
        raise UsageError(f"--rank {args.rank} out of range (0..{len(report.rows) - 1})")
    instance = report.rows[args.rank].instance
    seed = derive_seed(args.seed, "graft")
    result = graft_search(params, corpus.pk_seed, instance, seed, args.budget, args.workers)
    row = dict(result.to_dict(), param_set=params.name, instance=str(instance.address))
    _write_rows(args.out, [row])
    _record_stage(args, "graft", seed, [args.corpus], args.out)
    log.info("graft after %d attempts", result.attempts)
    return EXIT_OK


def _load_graft(path) -> tuple[GraftResult, InstanceAddress]:
    row = _row(_read_rows(path), "graft", path)
    try:
        return GraftResult.from_dict(row), InstanceAddress.parse(row["instance"])
    except (FormatError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_seek(args) -> int:
    corpus = _load_corpus(args.corpus)
    params = corpus.params
    _need(args, "graft")
    graft, address = _load_graft(args.graft)
    message = _message(args)
    seed = derive_seed(args.seed, "seek/" + message.hex())
    result = path_seek(params, corpus.pk_seed, corpus.pk_root, message, graft.index, address.layer, seed, args.budget, args.workers)
    row = dict(result.to_dict(), param_set=params.name, msg_hex=message.hex())
    _write_rows(args.out, [row])
    _record_stage(args, "seek", seed, [args.corpus, args.graft], args.out)
    log.info("seek after %d attempts", result.attempts)
    return EXIT_OK


def cmd_forge(args) -> int:
    corpus = _load_corpus(args.corpus)
    params = corpus.params
    _need(args, "graft", "seek")
    graft, address = _load_graft(args.graft)
    row = _row(_read_rows(args.seek), "seek", args.seek)
    try:
        seek = PathSeekResult.from_dict(row)
        message = bytes.fromhex(row["msg_hex"])
    except (FormatError, KeyError, ValueError) as exc:
        raise UsageError(f"{args.seek}: {exc}") from None
    instance = _instance_at(corpus, address, args.identify)
    try:
        sig = forge(params, corpus.pk_seed, corpus.pk_root, message, instance, graft, seek)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = {
        "kind": "forgery",
        "param_set": params.name,
        "pk_seed_hex": corpus.pk_seed.hex(),
        "pk_root_hex": corpus.pk_root.hex(),
        "msg_hex": message.hex(),
        "sig_hex": encode_signature(params, sig).hex(),
    }
    _write_rows(args.out, [out])
    _record_stage(args, "forge", None, [args.corpus, args.graft, args.seek], args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    row = _row(_read_rows(args.signature), "forgery", args.signature)
    try:
        params = parameter_set(row["param_set"])
        pk_seed = bytes.fromhex(row["pk_seed_hex"])
        pk_root = bytes.fromhex(row["pk_root_hex"])
        message = bytes.fromhex(row["msg_hex"])
        data = bytes.fromhex(row["sig_hex"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.signature}: bad signature file ({exc})") from None
    if args.key:
        name, keypair = _load_key(args.key)
        if name != params.name:
            print("key and signature use different parameter sets", file=sys.stderr)
            return EXIT_NEGATIVE
        pk_seed, pk_root = keypair.pk_seed, keypair.pk_root
    try:
        ok = slh_verify(params, message, decode_signature(params, data), pk_seed, pk_root)
    except FormatError:
        ok = False
    print("accept" if ok else "reject")
    return EXIT_OK if ok else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# argument parsing


def read_config(path) -> dict:
    """key=value lines; blank lines and ``#`` comments ignored."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{number}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slhfault", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="key=value defaults, overridden by flags")
        p.add_argument("--manifest", help="session manifest to update")
        p.add_argument("--out", help="output file (default stdout)")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="session seed")
        return p

    p = common(sub.add_parser("keygen", help="deterministic key pair from a seed"))
    p.add_argument("--param-set")
    p.set_defaults(func=cmd_keygen)

    p = common(sub.add_parser("campaign", help="simulated faulty signing campaign"))
    p.add_argument("--key")
    p.add_argument("--param-set")
    p.add_argument("--mode", choices=("det", "rand"), default="det")
    p.add_argument("--fault", help="layer:level:bit:trigger, '*' for random")
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--message")
    p.add_argument("--message-policy", choices=("fixed", "random"), default="fixed")
    p.set_defaults(func=cmd_campaign)

    def identify(p):
        p.add_argument("--identify", choices=(SEARCH, DIRECT), default=SEARCH)

    p = common(sub.add_parser("analyze", help="rank compromised instances by cost"), seed=False)
    p.add_argument("corpus")
    p.add_argument("--json", action="store_true", help="JSON lines instead of a table")
    identify(p)
    p.set_defaults(func=cmd_analyze)

    def search(p, budget):
        p.add_argument("--budget", type=int, default=budget)
        p.add_argument("--workers", type=int, default=1)

    p = common(sub.add_parser("graft", help="search a signable grafted tree"))
    p.add_argument("corpus")
    p.add_argument("--rank", type=int, default=0, help="instance rank from analyze")
    search(p, 1 << 20)
    identify(p)
    p.set_defaults(func=cmd_graft)

    p = common(sub.add_parser("seek", help="search R' routing a message into the grafted tree"))
    p.add_argument("corpus")
    p.add_argument("--graft")
    p.add_argument("--message")
    p.add_argument("--message-hex")
    search(p, 1 << 24)
    p.set_defaults(func=cmd_seek)

    p = common(sub.add_parser("forge", help="assemble the forged signature"), seed=False)
    p.add_argument("corpus")
    p.add_argument("--graft")
    p.add_argument("--seek")
    identify(p)
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("verify", help="verify a forgery file")
    p.add_argument("signature")
    p.add_argument("--key", help="verify against this key instead of the embedded one")
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults so explicit flags win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None:
            raise UsageError(f"{args.config}: unknown key {key!r}")
        try:
            value = action.type(raw) if action.type else raw
        except ValueError:
            raise UsageError(f"{args.config}: bad value for {key}") from None
        if action.choices and value not in action.choices:
            raise UsageError(f"{args.config}: {key} must be one of {sorted(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
        return args.func(args)
    except (UsageError, NotFound, FormatError) as exc:
        print(f"slhfault: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, NotCompromised) as exc:
        print(f"slhfault: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
