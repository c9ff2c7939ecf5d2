"""
File I/O only - scenario documents in, trace/report/figure tables out.
Business logic stays in the services layer.
"""
import math
import tomllib
from pathlib import Path
from typing import List, Union

import pandas as pd

from app.core.errors import ConfigurationError
from app.models.trace import EventKind, EventTrace, TraceEvent
from app.schemas.report import RunReport
from app.schemas.scenario import ScenarioFile

PathLike = Union[str, Path]

TRACE_COLUMNS = ['timestamp_ns', 'kind', 'task_id', 'cost_ns']
REPORT_COLUMNS = [
    'scenario_id',
    'mode',
    'n_tasks',
    'wakeups_per_s',
    'overhead_ns_per_s',
    'mean_latency_ns',
    'speedup',
]
# shared by every writer so outputs are byte-identical across runs and platforms
CSV_OPTIONS = {'index': False, 'lineterminator': '\n', 'encoding': 'utf-8'}


# ============================================================================
# SCENARIO FILES
# ============================================================================

def load_scenario(path: PathLike) -> ScenarioFile:
    """Parse and validate a TOML scenario; unknown keys are rejected"""
    with open(path, 'rb') as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"{path}: not a valid TOML document: {e}") from e
        except UnicodeDecodeError as e:
            raise ConfigurationError(f"{path}: not UTF-8 text: {e}") from e
    return ScenarioFile.model_validate(data)


# ============================================================================
# TRACES
# ============================================================================

def trace_to_frame(trace: EventTrace) -> pd.DataFrame:
    df = pd.DataFrame(
        [
            {
                'timestamp_ns': e.timestamp_ns,
                'kind': e.kind.value,
                'task_id': e.task_id,
                'cost_ns': e.cost_ns,
            }
            for e in trace
        ],
        columns=TRACE_COLUMNS,
    )
    df['timestamp_ns'] = df['timestamp_ns'].astype('int64')
    df['cost_ns'] = df['cost_ns'].astype('Int64')
    return df


def write_trace_csv(trace: EventTrace, path: PathLike) -> None:
    trace_to_frame(trace).to_csv(path, **CSV_OPTIONS)


def read_trace_csv(path: PathLike) -> EventTrace:
    df = pd.read_csv(
        path,
        dtype={'timestamp_ns': 'int64', 'kind': 'string', 'task_id': 'string', 'cost_ns': 'Int64'},
        keep_default_na=False,
        na_values={'task_id': [''], 'cost_ns': ['']},
    )
    events = [
        TraceEvent(
            timestamp_ns=int(row.timestamp_ns),
            kind=EventKind(row.kind),
            task_id=None if pd.isna(row.task_id) else str(row.task_id),
            cost_ns=None if pd.isna(row.cost_ns) else int(row.cost_ns),
        )
        for row in df.itertuples(index=False)
    ]
    return EventTrace(events=events)


# ============================================================================
# RUN REPORTS
# ============================================================================

def reports_to_frame(reports: List[RunReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [report.model_dump(include=set(REPORT_COLUMNS)) for report in reports],
        columns=REPORT_COLUMNS,
    )


def write_report_csv(reports: List[RunReport], path: PathLike) -> None:
    reports_to_frame(reports).to_csv(path, **CSV_OPTIONS)


def read_report_csv(path: PathLike) -> List[RunReport]:
    df = pd.read_csv(
        path,
        dtype={'scenario_id': 'string', 'mode': 'string', 'n_tasks': 'int64'},
        keep_default_na=False,
        na_values={'mean_latency_ns': [''], 'speedup': ['']},
        float_precision='round_trip',
    )

    def optional(value):
        return None if value is None or (isinstance(value, float) and math.isnan(value)) else float(value)

    return [
        RunReport(
            scenario_id=str(row.scenario_id),
            mode=str(row.mode),
            n_tasks=int(row.n_tasks),
            wakeups_per_s=float(row.wakeups_per_s),
            overhead_ns_per_s=float(row.overhead_ns_per_s),
            mean_latency_ns=optional(row.mean_latency_ns),
            speedup=optional(row.speedup),
        )
        for row in df.itertuples(index=False)
    ]


# ============================================================================
# FIGURE TABLES
# ============================================================================

def write_table_csv(df: pd.DataFrame, path_or_buf) -> None:
    """Plot-ready table to a file path or an open text stream (e.g. stdout)"""
    if isinstance(path_or_buf, (str, Path)):
        df.to_csv(path_or_buf, **CSV_OPTIONS)
    else:
        df.to_csv(path_or_buf, index=False, lineterminator='\n')
