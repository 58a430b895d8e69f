"""Command line entry point.

``reduce`` is meant to be run by cron or a similar scheduler. Every
subcommand that needs the current time accepts ``--now`` so runs can be
replayed exactly; the wall clock is only read here.
"""

from __future__ import annotations

import argparse
import sys
import time
from datetime import datetime, timedelta
from typing import Callable, Sequence

from . import costmodel
from .errors import DateminError, StoreError
from .precision import UTC, format_timestamp, parse_timestamp, precision
from .records import create_record, declare_model, hybrid_field, rough_field, vanishing_field
from .store import Store, random_ids, seeded_ids
from .vanishing import make_policy, pending_event, reduce_due, step

EXIT_OK, EXIT_USAGE, EXIT_STORE, EXIT_VALIDATION = 0, 2, 3, 4

DEMO_DAY = "2021-11-08"
SAMPLE_TIMES = ("12:20:11.673320", "12:20:14.313406", "12:20:17.248323", "12:20:33.040852", "12:20:35.917632")


def _timestamp_arg(text: str) -> datetime:
    try:
        return parse_timestamp(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _plural(n: int, word: str) -> str:
    return f"{n} {word}{'' if n == 1 else 's'}"


def _ids(seed: int | None) -> Callable[[], str]:
    return random_ids if seed is None else seeded_ids(seed)


def reduce_pass(path: str, now: datetime, seed: int | None = None) -> str:
    with Store.open(path, id_factory=_ids(seed)) as store:
        report = reduce_due(store, now)
    return f"{_plural(report.applied, 'reduction')} applied, {report.pending} pending"


def cmd_reduce(args: argparse.Namespace, out, clock: Callable[[], datetime], sleep: Callable[[float], None]) -> int:
    if args.interval is None:
        now = args.now or clock()
        print(reduce_pass(args.store, now, args.seed), file=out)
        return EXIT_OK
    # loop mode; with --now the clock is simulated and advances by the interval
    now = args.now
    done = 0
    try:
        while args.passes is None or done < args.passes:
            at = now if now is not None else clock()
            print(f"{format_timestamp(at)} {reduce_pass(args.store, at, args.seed)}", file=out, flush=True)
            done += 1
            if args.passes is not None and done >= args.passes:
                break
            if now is not None:
                now += timedelta(seconds=args.interval)
            else:
                sleep(args.interval)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, out) -> int:
    store = Store.open(args.store, readonly=True)
    print(f"format {store.meta['format_version']} hash {store.meta['hash_algorithm']}", file=out)
    for pid in sorted(store.policies):
        steps = ", ".join(f"{s.precision}@+{s.offset}s" for s in store.policies[pid].steps)
        print(f"policy {pid} [{steps}]", file=out)
    for name in sorted(store.models):
        fields = ", ".join(f"{f}:{d.kind}" for f, d in sorted(store.models[name].items()))
        print(f"model {name} ({fields})", file=out)
    for rid in sorted(store.records):
        r = store.records[rid]
        schema = store.models[r.model]
        parts = []
        for fname in sorted(r.fields):
            v = r.fields[fname]
            if isinstance(v, datetime):
                v = format_timestamp(v)
            elif schema[fname].holds_item and v is not None:
                v = f"item {v}"
            parts.append(f"{fname}={v}")
        print(f"record {rid} {r.model} {' '.join(parts)}", file=out)
    for iid in sorted(store.items):
        item = store.items[iid]
        ev = pending_event(store, iid)
        due = "-" if ev is None else format_timestamp(ev.due)
        flag = ""
        if ev is not None and args.now is not None and ev.due <= args.now:
            flag = " (due)"
        print(
            f"item {iid} value {format_timestamp(item.value)} step {item.step_index} "
            f"owner {item.owner.record}.{item.owner.field} next due {due}{flag}",
            file=out,
        )
    print(f"{_plural(len(store.contexts), 'context')}, {len(store.events)} pending", file=out)
    return EXIT_OK


def cmd_demo(args: argparse.Namespace, out) -> int:
    with Store.open(args.store, id_factory=_ids(args.seed), autocommit=False) as store:
        with store.transaction():
            demo_policy = make_policy(
                [step(hours=1), step(days=1, after_hours=3), step(months=1, after_days=7)], store
            )
            fast_policy = make_policy([step(seconds=5), step(seconds=30, after_minutes=1)], store)
            declare_model(
                store,
                "Sample",
                {
                    "vanishing": vanishing_field(fast_policy, capture="manual"),
                    "ordered": hybrid_field(policy=fast_policy, capture="manual"),
                },
            )
            declare_model(
                store,
                "Entry",
                {
                    "created_at": vanishing_field(demo_policy),
                    "joined": rough_field(precision(hours=1), capture="on_create"),
                },
            )
            print(f"policy {demo_policy.id} (1h, 1d after 3h, 1M after 7d)", file=out)
            print(f"policy {fast_policy.id} (5s, 30s after 1min)", file=out)
            samples = []
            for t in SAMPLE_TIMES:
                at = parse_timestamp(f"{DEMO_DAY}T{t}Z")
                samples.append(create_record(store, "Sample", at, values={"vanishing": at, "ordered": at}))
            _print_samples(store, samples, "1st", out)
            at = parse_timestamp(f"{DEMO_DAY}T12:22:00Z")
            report = reduce_due(store, at)
            print(f"reduce {format_timestamp(at)}: {_plural(report.applied, 'reduction')} applied", file=out)
            _print_samples(store, samples, "2nd", out)
            created = parse_timestamp(f"{DEMO_DAY}T15:17:00Z")
            entry = create_record(store, "Entry", created)
            item = store.items[entry.fields["created_at"]]
            ev = pending_event(store, item.id)
            print(
                f"entry {entry.id} created {format_timestamp(created)} stored {format_timestamp(item.value)} "
                f"next due {format_timestamp(ev.due)}",
                file=out,
            )
        store.commit()
    return EXIT_OK


def _print_samples(store: Store, samples, label: str, out) -> None:
    for r in samples:
        v = store.items[r.fields["vanishing"]].value
        o = store.items[r.fields["ordered"]].value
        print(f"sample {label} vanishing {format_timestamp(v)} ordered {format_timestamp(o)}", file=out)


def cmd_cost(args: argparse.Namespace, out) -> int:
    fmt = costmodel.format_number
    mix = []
    for pair in args.mix:
        kind, sep, count = pair.partition("=")
        if not sep or not count.strip().isdigit():
            raise argparse.ArgumentTypeError(f"expected kind=count, got {pair!r}")
        mix.append((kind, int(count)))
    if args.taiga:
        mix.extend(costmodel.taiga_mix())
    if not mix:
        for kind, cost in costmodel.FIELD_COSTS.items():
            print(f"{kind:<10} {cost:>4} B  {fmt(costmodel.factor(kind))}× plain", file=out)
        for name, cost in costmodel.AUX_COSTS.items():
            print(f"{name:<10} {cost:>4} B  (auxiliary)", file=out)
        return EXIT_OK
    result = costmodel.scenario_cost(mix)
    if result.fields == 1:
        print(f"{fmt(result.total)} B ({fmt(result.factor)}× plain)", file=out)
    else:
        print(
            f"{result.fields} fields, total {result.total} B, average {fmt(result.average)} B "
            f"({fmt(result.factor)}× plain)",
            file=out,
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="datemin", description="Data-minimising date types.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="apply due vanishing-date reductions")
    p.add_argument("--store", required=True)
    p.add_argument("--now", type=_timestamp_arg, help="override the current time (RFC 3339, UTC)")
    p.add_argument("--interval", type=_positive_float, help="repeat every N seconds")
    p.add_argument("--passes", type=int, help="stop loop mode after N passes")
    p.add_argument("--seed", type=int, help="seed for record/item ids (replays)")

    p = sub.add_parser("inspect", help="list records, items and pending events")
    p.add_argument("--store", required=True)
    p.add_argument("--now", type=_timestamp_arg, help="mark events due at this time")

    p = sub.add_parser("demo", help="populate a store with the worked examples")
    p.add_argument("--store", required=True)
    p.add_argument("--seed", type=int, help="seed for record/item ids (replays)")

    p = sub.add_parser("cost", help="storage cost per field kind or for a field mix")
    p.add_argument("mix", nargs="*", metavar="KIND=COUNT")
    p.add_argument("--taiga", action="store_true", help="add the Taiga replacement mix")
    return parser


def _wall_clock() -> datetime:
    return datetime.now(UTC)


def main(
    argv: Sequence[str] | None = None,
    out=None,
    clock: Callable[[], datetime] = _wall_clock,
    sleep: Callable[[float], None] = time.sleep,
) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reduce":
            return cmd_reduce(args, out, clock, sleep)
        if args.command == "inspect":
            return cmd_inspect(args, out)
        if args.command == "demo":
            return cmd_demo(args, out)
        return cmd_cost(args, out)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"datemin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StoreError as exc:
        print(f"datemin: {exc}", file=sys.stderr)
        return EXIT_STORE
    except DateminError as exc:
        print(f"datemin: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
