"""
Verification reports for the ED degree toolkit
Ties the mixed-volume bound to the numeric count and summarizes path telemetry
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from constants import (
    ALGORITHM_CELLS,
    ALGORITHM_IE,
    ALGORITHMS,
    EXIT_CODES,
    FACE_PROBE_LIMIT,
    MV_NORMALIZATION,
    VERDICT_BELOW,
    VERDICT_EQUAL,
    VERDICT_UNRELIABLE,
)
from ed_system import (
    EDProblem,
    build_lagrange_system,
    candidate_directions,
    classification_mismatches,
    ed_degree_bound_result,
    ed_polytopes,
    face_profiles,
)
from error_handler import NonGenericLiftingError, error_handler
from homotopy_solver import SolutionSet, SolverOptions, count_ed_critical_points, facial_solution_probe
from logger import logger
from problem_manager import problem_manager
from utils import to_jsonable, write_json


@dataclass
class VerificationReport:
    problem: Dict[str, Any]
    bound: Dict[str, Any]
    counts: Dict[str, int]
    telemetry: Dict[str, Any]
    faces: Dict[str, Any]
    verdict: str
    seeds: Dict[str, Any]
    tolerances: Dict[str, float]
    solutions: List[Dict[str, Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        data = {
            "problem": self.problem,
            "bound": self.bound,
            "counts": self.counts,
            "telemetry": self.telemetry,
            "faces": self.faces,
            "verdict": self.verdict,
            "seeds": self.seeds,
            "tolerances": self.tolerances,
            "solutions": self.solutions,
            "notes": self.notes,
        }
        if include_timings:
            data["timings"] = self.timings
        return to_jsonable(data)


def reliability_notes(solutions: SolutionSet) -> List[str]:
    """Reasons a numeric count cannot be trusted: too many failed paths or merged endpoints"""
    notes = []
    if not solutions.reliable:
        notes.append(f"{solutions.failed_count} of {solutions.path_count} paths failed")
    if any(k > 1 for k in solutions.multiplicities):
        notes.append("clustered endpoints indicate singular solutions")
    return notes


def decide_verdict(bounds: Dict[str, Optional[int]], count: int,
                   solutions: SolutionSet) -> Tuple[str, List[str]]:
    """EQUAL needs agreeing bounds, no failed path, no clustered endpoint and count = bound"""
    notes = []
    values = set(bounds.values())
    if None in values or len(values) != 1:
        notes.append(f"mixed volume algorithms disagree: {bounds}")
        return VERDICT_UNRELIABLE, notes
    bound = values.pop()
    notes.extend(reliability_notes(solutions))
    if count > bound:
        notes.append(f"count {count} exceeds the bound {bound}")
    if notes:
        return VERDICT_UNRELIABLE, notes
    if count == bound:
        if solutions.failed_count:
            notes.append(f"{solutions.failed_count} failed paths tolerated, equality not certified")
            return VERDICT_UNRELIABLE, notes
        return VERDICT_EQUAL, notes
    return VERDICT_BELOW, notes


class ReportManager:
    """Build bound, count and verification reports"""

    def bound_results(self, problem: EDProblem, algorithms=ALGORITHMS, workers: int = 1):
        """Bound per algorithm; a lifting that never turns generic yields None"""
        results, values = {}, {}
        for algorithm in algorithms:
            try:
                results[algorithm] = ed_degree_bound_result(problem, algorithm, problem.seed, workers)
                values[algorithm] = int(results[algorithm].value)
            except NonGenericLiftingError as e:
                error_handler.log_warning(str(e), f"{algorithm} mixed volume")
                values[algorithm] = None
        return results, values

    def bound_section(self, results, values, algorithm: str) -> Dict[str, Any]:
        cells = results.get(ALGORITHM_CELLS)
        return {
            "value": values.get(algorithm),
            "algorithm": algorithm,
            "normalization": MV_NORMALIZATION,
            "by_algorithm": values,
            "mixed_cells": len(cells.cells) if cells else None,
            "lifting_seeds_tried": list(cells.seeds_tried) if cells else [],
        }

    def path_telemetry(self, solutions: SolutionSet) -> Dict[str, Any]:
        """Per-status path summary"""
        frame = pd.DataFrame([{
            "status": p.status,
            "steps": p.steps,
            "newton_iterations": p.newton_iterations,
            "residual": p.residual,
        } for p in solutions.paths])
        if frame.empty:
            return {"paths": 0, "by_status": {}}
        grouped = frame.groupby("status").agg(
            paths=("steps", "size"),
            mean_steps=("steps", "mean"),
            max_steps=("steps", "max"),
            newton_iterations=("newton_iterations", "sum"),
        )
        grouped["mean_steps"] = grouped["mean_steps"].round(3)
        converged = frame.loc[frame["status"] == "Converged", "residual"]
        return {
            "paths": int(len(frame)),
            "by_status": {status: {k: to_jsonable(v) for k, v in row.items()}
                          for status, row in grouped.to_dict(orient="index").items()},
            "max_converged_residual": float(converged.max()) if not converged.empty else None,
        }

    def solution_rows(self, problem: EDProblem, solutions: SolutionSet) -> List[Dict[str, Any]]:
        rows = []
        for k, x in enumerate(solutions.solutions):
            rows.append({
                "x": [complex(z) for z in x[:problem.n]],
                "multipliers": [complex(z) for z in x[problem.n:]],
                "multiplicity": solutions.multiplicities[k],
                "torus": solutions.torus[k],
                "rank": solutions.ranks[k] if solutions.ranks else None,
                "rank_ratio": solutions.rank_ratios[k] if solutions.rank_ratios else None,
                "ambiguous": solutions.ambiguous[k] if solutions.ambiguous else False,
                "regular": solutions.regular[k],
            })
        return rows

    def counts_section(self, solutions: SolutionSet) -> Dict[str, int]:
        return {
            "total": solutions.total,
            "torus": solutions.torus_count,
            "regular": solutions.regular_count,
            "regular_torus": solutions.regular_torus_count,
            "ambiguous": solutions.ambiguous_count,
            "paths": solutions.path_count,
            "failed": solutions.failed_count,
            "recovered": solutions.recovered,
        }

    def face_diagnostics(self, problem: EDProblem, probe: bool, seed: int,
                         options: SolverOptions) -> Dict[str, Any]:
        """Classifier and inequality checks over the facet normals, plus facial probes"""
        directions = candidate_directions(problem)
        system = build_lagrange_system(problem)
        profiles = face_profiles(problem, directions, options.workers)
        mismatches = [list(p.direction) for p in profiles if classification_mismatches(problem, p, system)]
        order_bound = [list(p.direction) for p in profiles if not p.order_bound_holds()]
        origin = [list(p.direction) for p in profiles if not p.origin_property_holds(problem)]
        section = {
            "directions": len(profiles),
            "classifier_mismatches": mismatches,
            "order_bound_violations": order_bound,
            "origin_violations": origin,
            "probed": 0,
            "solvable": [],
        }
        if probe:
            for profile in profiles[:FACE_PROBE_LIMIT]:
                verdict = facial_solution_probe(problem, profile.direction, seed, options)
                section["probed"] += 1
                if verdict.found:
                    section["solvable"].append({"w": list(profile.direction),
                                                "witness": list(verdict.witness),
                                                "residual": verdict.residual})
        return section

    def verify(self, problem: EDProblem, options: SolverOptions, algorithm: str = ALGORITHM_IE,
               face_diagnostics: bool = True, allow_reseed: bool = True) -> VerificationReport:
        """Bound by both algorithms, count numerically, compare"""
        timings = {}
        started = time.perf_counter()
        results, values = self.bound_results(problem, ALGORITHMS, options.workers)
        timings["bound"] = time.perf_counter() - started

        started = time.perf_counter()
        count, solutions = count_ed_critical_points(problem, problem.seed, options)
        timings["count"] = time.perf_counter() - started

        verdict, notes = decide_verdict(values, count, solutions)
        if verdict == VERDICT_BELOW and problem.randomized and allow_reseed:
            new_seed = problem.seed + 1
            logger.warning(f"Count {count} below bound {values[algorithm]} for a randomized problem; "
                           f"redrawing coefficients with seed {new_seed}")
            reseeded = problem_manager.randomize_coefficients(problem, new_seed)
            report = self.verify(reseeded, options, algorithm, face_diagnostics, allow_reseed=False)
            report.seeds["reseeded_from"] = problem.seed
            report.timings["first_attempt"] = timings["bound"] + timings["count"]
            return report

        faces = {}
        if face_diagnostics:
            started = time.perf_counter()
            faces = self.face_diagnostics(problem, verdict == VERDICT_BELOW, problem.seed, options)
            timings["faces"] = time.perf_counter() - started

        if solutions.ambiguous_count:
            notes.append(f"{solutions.ambiguous_count} solutions near the rank threshold")
        logger.info(f"Verdict {verdict}: bound {values.get(algorithm)}, regular count {count}")
        return VerificationReport(
            problem=problem_manager.echo(problem),
            bound=self.bound_section(results, values, algorithm),
            counts=self.counts_section(solutions),
            telemetry=self.path_telemetry(solutions),
            faces=faces,
            verdict=verdict,
            seeds={"problem": problem.seed, "homotopy": problem.seed, "lifting": problem.seed},
            tolerances=options.tolerances(),
            solutions=self.solution_rows(problem, solutions),
            notes=notes,
            timings=timings,
        )

    def polytope_tables(self, problem: EDProblem) -> Dict[str, pd.DataFrame]:
        """Vertex tables of P_1..P_m and P'_1..P'_n"""
        polytopes = ed_polytopes(problem)
        columns = list(problem.variables) + list(problem.multiplier_names())
        names = [f"P{j + 1}" for j in range(problem.m)] + [f"P'{i + 1}" for i in range(problem.n)]
        return {name: pd.DataFrame([list(v) for v in polytope.vertices], columns=columns)
                for name, polytope in zip(names, polytopes.all)}

    async def write_report(self, report: VerificationReport, path):
        await write_json(path, report.to_dict())
        logger.info(f"Report written to {path}")


# Global report manager instance
report_manager = ReportManager()
