"""One-shot builder for the fixture suite (not part of the package).

Defines 16 tasks with inputs and a correct candidate each, executes the
candidate to fill in expected outputs, and writes:
    src/anka/bench/fixture/suite.json
    src/anka/bench/fixture/candidates/<task>/sample_1.anka
    src/anka/bench/fixture/broken/<task>/{syntax_error,runtime_error,wrong_output}.anka
Review the printed expected tables by hand before committing.
"""

import json
from pathlib import Path

from anka.interpreter import run_pipeline
from anka.io_adapters import IoAdapter, json_rows_to_table, table_to_json
from anka.parser import parse
from anka.validator import validate
from anka.values import Field, Schema, Table, ValueType

ROOT = Path(__file__).parent.parent / "src" / "anka" / "bench" / "fixture"


def schema(*pairs):
    return [{"name": n, "type": t} for n, t in pairs]


TASKS = [
    # --- filter -------------------------------------------------------------
    {
        "id": "filter_high_value",
        "category": "filter",
        "description": "Keep the orders whose amount is strictly greater than 100.00, preserving row order and all columns.",
        "inputs": {"orders": schema(("id", "INT"), ("amount", "DECIMAL"))},
        "tests": [
            {"orders": [
                {"id": 1, "amount": "50.00"},
                {"id": 2, "amount": "150.00"},
                {"id": 3, "amount": "100.00"},
                {"id": 4, "amount": "250.00"},
            ]},
            {"orders": [
                {"id": 9, "amount": "99.99"},
            ]},
        ],
        "candidate": """\
PIPELINE high_value_orders:
  INPUT orders: TABLE[id: INT, amount: DECIMAL]
  STEP keep_large:
    FILTER orders WHERE amount > 100.00 INTO large
  OUTPUT large
""",
        "broken_wrong": """\
PIPELINE high_value_orders:
  INPUT orders: TABLE[id: INT, amount: DECIMAL]
  STEP keep_large:
    FILTER orders WHERE amount >= 100.00 INTO large
  OUTPUT large
""",
    },
    {
        "id": "filter_active_adults",
        "category": "filter",
        "description": "Keep users who are at least 18 years old and active.",
        "inputs": {"users": schema(("name", "STRING"), ("age", "INT"), ("active", "BOOL"))},
        "tests": [
            {"users": [
                {"name": "ana", "age": 17, "active": True},
                {"name": "bo", "age": 18, "active": True},
                {"name": "cy", "age": 40, "active": False},
                {"name": "dee", "age": 25, "active": True},
            ]},
        ],
        "candidate": """\
PIPELINE active_adults:
  INPUT users: TABLE[name: STRING, age: INT, active: BOOL]
  STEP keep:
    FILTER users WHERE age >= 18 AND active INTO adults
  OUTPUT adults
""",
    },
    # --- map ----------------------------------------------------------------
    {
        "id": "map_total_price",
        "category": "map",
        "description": "Append a column named total holding price times quantity for every line item.",
        "inputs": {"items": schema(("name", "STRING"), ("price", "DECIMAL"), ("qty", "INT"))},
        "tests": [
            {"items": [
                {"name": "bolt", "price": "0.25", "qty": 100},
                {"name": "nut", "price": "0.10", "qty": 250},
                {"name": "gear", "price": "12.50", "qty": 3},
            ]},
        ],
        "candidate": """\
PIPELINE totals:
  INPUT items: TABLE[name: STRING, price: DECIMAL, qty: INT]
  STEP extend:
    MAP items WITH total => price * qty INTO priced
  OUTPUT priced
""",
    },
    {
        "id": "map_shouted_names",
        "category": "map",
        "description": "Append a column named loud holding the upper-cased name.",
        "inputs": {"users": schema(("name", "STRING"),)},
        "tests": [
            {"users": [{"name": "ada"}, {"name": "grace"}, {"name": None}]},
        ],
        "candidate": """\
PIPELINE shout:
  INPUT users: TABLE[name: STRING]
  STEP extend:
    MAP users WITH loud => UPPER(name) INTO shouted
  OUTPUT shouted
""",
    },
    # --- aggregate ----------------------------------------------------------
    {
        "id": "agg_revenue_by_region",
        "category": "aggregate",
        "description": "Group sales by region (in order of first appearance) and report total revenue and the number of sales per region as columns revenue and n.",
        "inputs": {"sales": schema(("region", "STRING"), ("amount", "DECIMAL"))},
        "tests": [
            {"sales": [
                {"region": "west", "amount": "10.00"},
                {"region": "east", "amount": "5.50"},
                {"region": "west", "amount": "2.50"},
                {"region": "north", "amount": "1.00"},
            ]},
        ],
        "candidate": """\
PIPELINE revenue:
  INPUT sales: TABLE[region: STRING, amount: DECIMAL]
  STEP rollup:
    AGGREGATE sales GROUP_BY region COMPUTE SUM(amount) AS revenue, COUNT() AS n INTO summary
  OUTPUT summary
""",
        "broken_wrong": """\
PIPELINE revenue:
  INPUT sales: TABLE[region: STRING, amount: DECIMAL]
  STEP rollup:
    AGGREGATE sales GROUP_BY region COMPUTE COUNT() AS revenue, COUNT() AS n INTO summary
  OUTPUT summary
""",
    },
    {
        "id": "agg_score_stats",
        "category": "aggregate",
        "description": "Over the whole table compute the lowest score as lo, the highest score as hi, and the average score as mean.",
        "inputs": {"scores": schema(("player", "STRING"), ("points", "INT"))},
        "tests": [
            {"scores": [
                {"player": "p1", "points": 10},
                {"player": "p2", "points": 7},
                {"player": "p3", "points": 13},
            ]},
            {"scores": []},
        ],
        "candidate": """\
PIPELINE stats:
  INPUT scores: TABLE[player: STRING, points: INT]
  STEP whole:
    AGGREGATE scores COMPUTE MIN(points) AS lo, MAX(points) AS hi, AVG(points) AS mean INTO result
  OUTPUT result
""",
    },
    # --- strings ------------------------------------------------------------
    {
        "id": "strings_normalize_emails",
        "category": "strings",
        "description": "Append a column named normalized holding the e-mail lower-cased with surrounding whitespace removed.",
        "inputs": {"contacts": schema(("email", "STRING"),)},
        "tests": [
            {"contacts": [
                {"email": "  Alice@Example.COM "},
                {"email": "BOB@test.org"},
            ]},
        ],
        "candidate": """\
PIPELINE normalize:
  INPUT contacts: TABLE[email: STRING]
  STEP clean:
    MAP contacts WITH normalized => LOWER(TRIM(email)) INTO cleaned
  OUTPUT cleaned
""",
    },
    {
        "id": "strings_ticket_codes",
        "category": "strings",
        "description": "Append a column named code holding the first three characters of the label upper-cased, followed by a dash, followed by the label's length as text. For the label \"widget\" the code is \"WID-6\".",
        "inputs": {"tickets": schema(("label", "STRING"),)},
        "tests": [
            {"tickets": [
                {"label": "widget"},
                {"label": "ox"},
                {"label": "assembly kit"},
            ]},
        ],
        "candidate": """\
PIPELINE codes:
  INPUT tickets: TABLE[label: STRING]
  STEP build:
    MAP tickets WITH code => CONCAT(CONCAT(UPPER(SUBSTRING(label, 0, 3)), "-"), TO_STRING(LENGTH(label))) INTO coded
  OUTPUT coded
""",
    },
    # --- multi_step ----------------------------------------------------------
    {
        "id": "multi_tax_summary",
        "category": "multi_step",
        "description": "Keep orders with amount above 1000, add a tax column of 8 percent of the amount, group by customer computing the summed amount as total and the order count as num_orders, then sort by customer ascending.",
        "inputs": {"orders": schema(("order_id", "INT"), ("customer", "STRING"), ("amount", "DECIMAL"))},
        "tests": [
            {"orders": [
                {"order_id": 1, "customer": "alice", "amount": "1500.00"},
                {"order_id": 2, "customer": "bob", "amount": "800.00"},
                {"order_id": 3, "customer": "alice", "amount": "2000.00"},
                {"order_id": 4, "customer": "zed", "amount": "1001.00"},
            ]},
        ],
        "candidate": """\
PIPELINE tax_summary:
  INPUT orders: TABLE[order_id: INT, customer: STRING, amount: DECIMAL]
  STEP filter_large:
    FILTER orders WHERE amount > 1000 INTO large_orders
  STEP add_tax:
    MAP large_orders WITH tax => amount * 0.08 INTO with_tax
  STEP summarize:
    AGGREGATE with_tax GROUP_BY customer COMPUTE SUM(amount) AS total, COUNT() AS num_orders INTO summary
  STEP order_out:
    SORT summary BY customer ASC INTO sorted_summary
  OUTPUT sorted_summary
""",
    },
    {
        "id": "multi_top_spenders",
        "category": "multi_step",
        "description": "Join orders to customers on customer_id equal to id, keep rows with amount of at least 50.00, group by name computing the summed amount as spent, sort by spent descending, and keep the top two rows.",
        "inputs": {
            "orders": schema(("customer_id", "INT"), ("amount", "DECIMAL")),
            "customers": schema(("id", "INT"), ("name", "STRING")),
        },
        "tests": [
            {
                "orders": [
                    {"customer_id": 1, "amount": "20.00"},
                    {"customer_id": 1, "amount": "80.00"},
                    {"customer_id": 2, "amount": "55.00"},
                    {"customer_id": 3, "amount": "75.00"},
                    {"customer_id": 3, "amount": "75.00"},
                ],
                "customers": [
                    {"id": 1, "name": "ana"},
                    {"id": 2, "name": "bo"},
                    {"id": 3, "name": "cy"},
                ],
            },
        ],
        "candidate": """\
PIPELINE top_spenders:
  INPUT orders: TABLE[customer_id: INT, amount: DECIMAL]
  INPUT customers: TABLE[id: INT, name: STRING]
  STEP attach:
    JOIN orders WITH customers ON customer_id == id INTO named
  STEP keep_large:
    FILTER named WHERE amount >= 50.00 INTO large
  STEP rollup:
    AGGREGATE large GROUP_BY name COMPUTE SUM(amount) AS spent INTO by_name
  STEP rank:
    SORT by_name BY spent DESC INTO ranked
  STEP top:
    LIMIT ranked TO 2 INTO winners
  OUTPUT winners
""",
    },
    # --- finance -------------------------------------------------------------
    {
        "id": "finance_net_amounts",
        "category": "finance",
        "description": "For each transaction compute fee as gross times fee_rate and net as gross minus fee, then output only the columns id and net.",
        "inputs": {"txns": schema(("id", "INT"), ("gross", "DECIMAL"), ("fee_rate", "DECIMAL"))},
        "tests": [
            {"txns": [
                {"id": 1, "gross": "100.00", "fee_rate": "0.0250"},
                {"id": 2, "gross": "19.99", "fee_rate": "0.0300"},
            ]},
        ],
        "candidate": """\
PIPELINE net_amounts:
  INPUT txns: TABLE[id: INT, gross: DECIMAL, fee_rate: DECIMAL]
  STEP fee:
    MAP txns WITH fee => gross * fee_rate INTO with_fee
  STEP net:
    MAP with_fee WITH net => gross - fee INTO with_net
  STEP narrow:
    SELECT with_net COLUMNS id, net INTO result
  OUTPUT result
""",
        "broken_wrong": """\
PIPELINE net_amounts:
  INPUT txns: TABLE[id: INT, gross: DECIMAL, fee_rate: DECIMAL]
  STEP fee:
    MAP txns WITH fee => gross * fee_rate INTO with_fee
  STEP net:
    MAP with_fee WITH net => gross + fee INTO with_net
  STEP narrow:
    SELECT with_net COLUMNS id, net INTO result
  OUTPUT result
""",
    },
    {
        "id": "finance_overdrawn_accounts",
        "category": "finance",
        "description": "Sum ledger amounts per account as balance (grouping in order of first appearance), then keep accounts whose balance is below zero.",
        "inputs": {"ledger": schema(("account", "STRING"), ("amount", "DECIMAL"))},
        "tests": [
            {"ledger": [
                {"account": "ops", "amount": "100.00"},
                {"account": "rnd", "amount": "-120.50"},
                {"account": "ops", "amount": "-150.00"},
                {"account": "rnd", "amount": "120.50"},
                {"account": "mkt", "amount": "-0.01"},
            ]},
        ],
        "candidate": """\
PIPELINE overdrawn:
  INPUT ledger: TABLE[account: STRING, amount: DECIMAL]
  STEP balances:
    AGGREGATE ledger GROUP_BY account COMPUTE SUM(amount) AS balance INTO totals
  STEP negative:
    FILTER totals WHERE balance < 0.00 INTO result
  OUTPUT result
""",
    },
    # --- hard ----------------------------------------------------------------
    {
        "id": "hard_safe_ratios",
        "category": "hard",
        "description": "Append a column named ratio holding num divided by den (integer division). If any division fails, instead append a ratio column holding the constant -1 for every row.",
        "inputs": {"data": schema(("id", "INT"), ("num", "INT"), ("den", "INT"))},
        "tests": [
            {"data": [
                {"id": 1, "num": 10, "den": 2},
                {"id": 2, "num": 9, "den": 4},
            ]},
            {"data": [
                {"id": 1, "num": 10, "den": 2},
                {"id": 2, "num": 7, "den": 0},
            ]},
        ],
        "candidate": """\
PIPELINE safe_ratios:
  INPUT data: TABLE[id: INT, num: INT, den: INT]
  STEP attempt:
    TRY
      MAP data WITH ratio => num / den INTO result
    ON_ERROR
      ADD_COLUMN data WITH ratio = -1 INTO result
    END_TRY
  OUTPUT result
""",
        "broken_runtime": """\
PIPELINE safe_ratios:
  INPUT data: TABLE[id: INT, num: INT, den: INT]
  STEP attempt:
    MAP data WITH ratio => num / den INTO result
  OUTPUT result
""",
    },
    {
        "id": "hard_latest_distinct_events",
        "category": "hard",
        "description": "Deduplicate full rows, sort by id descending, and keep the first two rows of the result.",
        "inputs": {"events": schema(("id", "INT"), ("kind", "STRING"))},
        "tests": [
            {"events": [
                {"id": 3, "kind": "open"},
                {"id": 1, "kind": "close"},
                {"id": 3, "kind": "open"},
                {"id": 7, "kind": "open"},
                {"id": 5, "kind": "close"},
            ]},
        ],
        "candidate": """\
PIPELINE latest_events:
  INPUT events: TABLE[id: INT, kind: STRING]
  STEP uniq:
    DISTINCT events INTO unique_events
  STEP order_desc:
    SORT unique_events BY id DESC INTO newest_first
  STEP top:
    SLICE newest_first FROM 0 TO 2 INTO result
  OUTPUT result
""",
    },
    # --- adversarial -----------------------------------------------------------
    {
        "id": "adversarial_nothing_matches",
        "category": "adversarial",
        "description": "Keep rows whose value v exceeds 1000. The schema of the result must be preserved even when no row matches.",
        "inputs": {"rows": schema(("v", "INT"), ("tag", "STRING"))},
        "tests": [
            {"rows": [
                {"v": 1, "tag": "a"},
                {"v": 999, "tag": "b"},
            ]},
            {"rows": [
                {"v": 1001, "tag": "c"},
                {"v": 2, "tag": "d"},
            ]},
        ],
        "candidate": """\
PIPELINE nothing_matches:
  INPUT rows: TABLE[v: INT, tag: STRING]
  STEP sieve:
    FILTER rows WHERE v > 1000 INTO kept
  OUTPUT kept
""",
        "broken_runtime": """\
PIPELINE nothing_matches:
  INPUT rows: TABLE[v: INT, tag: STRING]
  STEP sieve:
    MAP rows WITH crash => v / 0 INTO crashed
  STEP keep:
    FILTER crashed WHERE v > 1000 INTO kept
  OUTPUT kept
""",
    },
    {
        "id": "adversarial_group_order_trap",
        "category": "adversarial",
        "description": "Sum v per key k. The row order of the result does not matter.",
        "order_insensitive": True,
        "inputs": {"rows": schema(("k", "STRING"), ("v", "INT"))},
        "tests": [
            {"rows": [
                {"k": "b", "v": 1},
                {"k": "a", "v": 2},
                {"k": "b", "v": 3},
            ]},
        ],
        "candidate": """\
PIPELINE group_sums:
  INPUT rows: TABLE[k: STRING, v: INT]
  STEP rollup:
    AGGREGATE rows GROUP_BY k COMPUTE SUM(v) AS total INTO sums
  OUTPUT sums
""",
        # expected is stored sorted by k, which differs from the
        # first-appearance order the interpreter produces
        "expected_shuffle": True,
    },
]

GENERIC_SYNTAX_ERROR = """\
PIPELINE broken:
  INPUT rows: TABLE[v: INT]
  STEP s:
    FILTER rows WHERE v > 0
  OUTPUT rows
"""


def input_decls(task):
    lines = []
    for name, fields in task["inputs"].items():
        decl = ", ".join(f"{f['name']}: {f['type']}" for f in fields)
        lines.append(f"  INPUT {name}: TABLE[{decl}]")
    return "\n".join(lines)


def mechanical_runtime_error(task):
    first = next(iter(task["inputs"]))
    return (
        f"PIPELINE crashes:\n{input_decls(task)}\n"
        f"  STEP crash:\n    MAP {first} WITH crash_col => 1 / 0 INTO crashed\n"
        f"  OUTPUT crashed\n"
    )


def mechanical_wrong_output(task):
    first = next(iter(task["inputs"]))
    return (
        f"PIPELINE shrunk:\n{input_decls(task)}\n"
        f"  STEP shrink:\n    LIMIT {first} TO 0 INTO nothing\n"
        f"  OUTPUT nothing\n"
    )


def to_value_type(tag):
    return ValueType(tag)


def build_schema(fields):
    return Schema(Field(f["name"], to_value_type(f["type"])) for f in fields)


def table_to_json_rows(table: Table):
    return json.loads(table_to_json(table).decode("utf-8"), parse_float=str)


def main():
    suite = {"name": "anka-fixture", "tasks": []}
    candidates_dir = ROOT / "candidates"
    broken_dir = ROOT / "broken"
    for task in TASKS:
        pipeline = parse(task["candidate"])
        result = validate(pipeline)
        assert result.ok, (task["id"], result.errors)
        schemas = {
            name: build_schema(fields) for name, fields in task["inputs"].items()
        }
        tests = []
        for test_inputs in task["tests"]:
            tables = {
                name: json_rows_to_table(rows, schemas[name])
                for name, rows in test_inputs.items()
            }
            output = run_pipeline(pipeline, tables, IoAdapter(sandbox=True))
            expected_rows = table_to_json_rows(output)
            if task.get("expected_shuffle"):
                expected_rows = sorted(expected_rows, key=lambda r: sorted(r.items()))
            tests.append(
                {
                    "inputs": test_inputs,
                    "expected": {
                        "schema": [
                            {"name": f.name, "type": f.type.value}
                            for f in output.schema.fields
                        ],
                        "rows": expected_rows,
                    },
                }
            )
            print(f"--- {task['id']}")
            print("    expected:", expected_rows)
        entry = {
            "id": task["id"],
            "category": task["category"],
            "description": task["description"],
            "inputs": task["inputs"],
            "tests": tests,
        }
        if task.get("order_insensitive"):
            entry["order_insensitive"] = True
        suite["tasks"].append(entry)

        cdir = candidates_dir / task["id"]
        cdir.mkdir(parents=True, exist_ok=True)
        (cdir / "sample_1.anka").write_text(task["candidate"], encoding="utf-8")

    # one broken variant of each kind for the first task of each category
    first_of_category = {}
    for task in TASKS:
        first_of_category.setdefault(task["category"], task)
    for task in first_of_category.values():
        bdir = broken_dir / task["id"]
        bdir.mkdir(parents=True, exist_ok=True)
        (bdir / "syntax_error.anka").write_text(GENERIC_SYNTAX_ERROR, encoding="utf-8")
        runtime = task.get("broken_runtime", mechanical_runtime_error(task))
        wrong = task.get("broken_wrong", mechanical_wrong_output(task))
        for name, source in [("runtime_error.anka", runtime), ("wrong_output.anka", wrong)]:
            pipeline = parse(source)
            assert validate(pipeline).ok, (task["id"], name)
            (bdir / name).write_text(source, encoding="utf-8")

    (ROOT / "suite.json").write_text(
        json.dumps(suite, indent=2) + "\n", encoding="utf-8"
    )
    print(f"\nwrote {len(TASKS)} tasks")


if __name__ == "__main__":
    main()
