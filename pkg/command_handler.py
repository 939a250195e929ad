"""
Command handling for the eddeg CLI
Registry of subcommands; each loads a problem, runs one workflow and prints a report
"""

import sys
from typing import Any, Callable, Dict, Tuple

from config_manager import config_manager
from constants import CASE_TAGS, EXIT_CODES, VERDICT_EQUAL, VERDICT_UNRELIABLE
from ed_system import (
    EDProblem,
    build_lagrange_system,
    classification_mismatches,
    ed_degree_bound_result,
    face_profile,
    facial_system,
)
from error_handler import EDDegError, error_handler
from homotopy_solver import SolverOptions, count_ed_critical_points, facial_solution_probe
from logger import logger
from problem_manager import problem_manager
from report_manager import reliability_notes, report_manager
from utils import dumps, format_complex, format_rational, format_vector, parse_direction


class CommandHandler:
    """Centralized command handling with consistent error reporting"""

    def __init__(self):
        self.commands: Dict[str, Callable] = {}
        self._register_commands()

    def _register_commands(self):
        """Register all subcommands"""
        self.commands = {
            'bound': self.cmd_bound,
            'count': self.cmd_count,
            'verify': self.cmd_verify,
            'faces': self.cmd_faces,
            'polytopes': self.cmd_polytopes,
        }

    async def execute(self, args) -> int:
        """Run the subcommand named by args.command and return its exit code"""
        command_func = self.commands.get(args.command)
        if command_func is None:
            logger.error(f"Unknown command: {args.command}")
            return EXIT_CODES['ERROR']
        try:
            return await command_func(args)
        except (EDDegError, OSError, ValueError) as e:
            category = error_handler.get_error_category(e)
            error_handler.handle_error(e, f"{args.command} command [{category}]")
            print(error_handler.format_error_message(e, f"{args.command} command"), file=sys.stderr)
            return error_handler.exit_code_for(e)

    def _emit(self, text: str):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")

    async def _load(self, args) -> Tuple[EDProblem, Dict[str, Any]]:
        settings = await config_manager.load_settings(getattr(args, "config", None))
        problem = await problem_manager.load_problem(args.file, getattr(args, "seed", None))
        settings["tolerances"].update(dict(problem.tolerances))
        return problem, settings

    def _options(self, args, settings: Dict[str, Any]) -> SolverOptions:
        return SolverOptions.from_settings(settings, residual=getattr(args, "tol", None),
                                           workers=config_manager.resolve_threads(settings))

    async def cmd_bound(self, args) -> int:
        problem, settings = await self._load(args)
        algorithm = args.algorithm or settings["algorithm"]
        result = ed_degree_bound_result(problem, algorithm, problem.seed,
                                        config_manager.resolve_threads(settings))
        if args.json:
            self._emit(dumps({
                "problem": problem_manager.echo(problem),
                "bound": {"value": result.value, "algorithm": algorithm,
                          "normalization": result.normalization,
                          "mixed_cells": len(result.cells) if result.cells else None},
                "timings": {"bound": result.elapsed},
            }))
        else:
            self._emit(f"ED degree bound: {format_rational(result.value)}\n"
                       f"algorithm: {algorithm}\n"
                       f"normalization: {result.normalization}")
        return EXIT_CODES[VERDICT_EQUAL]

    async def cmd_count(self, args) -> int:
        problem, settings = await self._load(args)
        options = self._options(args, settings)
        count, solutions = count_ed_critical_points(problem, problem.seed, options)
        if args.json:
            self._emit(dumps({
                "problem": problem_manager.echo(problem),
                "counts": report_manager.counts_section(solutions),
                "telemetry": report_manager.path_telemetry(solutions),
                "solutions": report_manager.solution_rows(problem, solutions),
                "seeds": {"homotopy": problem.seed},
                "tolerances": options.tolerances(),
                "timings": {"count": solutions.elapsed},
            }))
        else:
            lines = [
                f"regular critical points: {count}",
                f"torus solutions: {solutions.torus_count}",
                f"distinct solutions: {solutions.total}",
                f"paths: {solutions.path_count} ({solutions.failed_count} failed)",
            ]
            for row in report_manager.solution_rows(problem, solutions):
                point = ", ".join(format_complex(z) for z in row["x"] + row["multipliers"])
                flags = "regular" if row["regular"] else "singular"
                lines.append(f"  ({point})  {flags}{'' if row['torus'] else ', off torus'}")
            self._emit("\n".join(lines))
        notes = reliability_notes(solutions)
        for note in notes:
            logger.warning(f"Count is unreliable: {note}")
        return EXIT_CODES[VERDICT_UNRELIABLE] if notes else EXIT_CODES[VERDICT_EQUAL]

    async def cmd_verify(self, args) -> int:
        problem, settings = await self._load(args)
        options = self._options(args, settings)
        algorithm = args.algorithm or settings["algorithm"]
        report = report_manager.verify(problem, options, algorithm, settings["face_diagnostics"])
        if args.out:
            await report_manager.write_report(report, args.out)
        if args.json:
            self._emit(dumps(report.to_dict()))
        else:
            lines = [
                f"verdict: {report.verdict}",
                f"bound: {report.bound['value']} ({report.bound['algorithm']}; "
                f"by algorithm {report.bound['by_algorithm']})",
                f"regular count: {report.counts['regular']}",
                f"torus count: {report.counts['torus']}",
                f"paths: {report.counts['paths']} ({report.counts['failed']} failed)",
                f"seed: {report.seeds['problem']}",
            ]
            lines.extend(f"note: {note}" for note in report.notes)
            for entry in report.faces.get("solvable", []):
                lines.append(f"facial system solvable for w = {tuple(entry['w'])}")
            self._emit("\n".join(lines))
        return report.exit_code

    async def cmd_faces(self, args) -> int:
        problem, settings = await self._load(args)
        w = parse_direction(args.w)
        profile = face_profile(problem, w)
        system = build_lagrange_system(problem)
        mismatches = classification_mismatches(problem, profile, system)
        names = system.variables
        faces = facial_system(problem, w)
        verdict = facial_solution_probe(problem, w, problem.seed, self._options(args, settings))
        lines = [f"w = {format_vector(w)}", f"e = {profile.e}, S = {sorted(k + 1 for k in profile.S)}"]
        for j in range(problem.m):
            lines.append(f"h{j + 1} = {profile.h[j]}  face: {faces[j].to_text(names)}")
        for i in range(problem.n):
            e_i = "inf" if profile.e_partial[i] is None else profile.e_partial[i]
            lines.append(f"L{i + 1}: case {profile.cases[i]} ({CASE_TAGS[profile.cases[i]]}), e_{i + 1} = {e_i}, "
                         f"face: {profile.predicted[i].to_text(names)}")
        lines.append(f"classifier agrees with direct faces: {not mismatches}")
        lines.append(f"partial order bound holds: {profile.order_bound_holds()}")
        lines.append(f"facial probe: {verdict.kind}"
                     + (f" ({verdict.reason})" if verdict.reason else f" (residual {verdict.residual:.2e})"))
        self._emit("\n".join(lines))
        return EXIT_CODES[VERDICT_EQUAL]

    async def cmd_polytopes(self, args) -> int:
        problem, _ = await self._load(args)
        tables = report_manager.polytope_tables(problem)
        if args.json:
            self._emit(dumps({name: frame.values.tolist() for name, frame in tables.items()}))
        else:
            self._emit("\n\n".join(f"{name}:\n{frame.to_string(index=False)}" for name, frame in tables.items()))
        return EXIT_CODES[VERDICT_EQUAL]


# Global command handler instance
command_handler = CommandHandler()
