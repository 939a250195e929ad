"""
Problem file management for the ED degree toolkit
Line-oriented problem files, JSON report re-runs, seeded coefficient draws
"""

import json
import random
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from config_manager import config_manager
from constants import COEFFICIENT_SAMPLING, DEFAULT_FIXTURE_DIR, DEFAULT_SEED, DEFAULT_SETTINGS, PROBLEM_FILE_SUFFIX
from ed_system import EDProblem, sample_u
from error_handler import EDDegError, PolynomialSyntaxError, ProblemValidationError
from logger import logger
from polynomial import Polynomial, parse_polynomial, support
from utils import format_rational

_ASSIGNMENT = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_.]*)\s*=\s*")
_EQUATION_KEY = re.compile(r"^f(?P<index>[1-9][0-9]*)$")


def coefficient_sampler(seed: int) -> Callable[[], Fraction]:
    """Seeded draws of nonzero rationals for '?' coefficients"""
    rng = random.Random(f"coefficients:{seed}")
    bound, max_den = COEFFICIENT_SAMPLING['NUMERATOR_BOUND'], COEFFICIENT_SAMPLING['MAX_DENOMINATOR']

    def draw() -> Fraction:
        while True:
            value = Fraction(rng.randint(-bound, bound), rng.randint(1, max_den))
            if value != 0:
                return value

    return draw


def _parse_rationals(text: str, line: int, what: str) -> Tuple[Fraction, ...]:
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        try:
            values.append(Fraction(piece))
        except (ValueError, ZeroDivisionError) as e:
            raise ProblemValidationError(f"line {line}: invalid {what} entry {piece!r}") from e
    return tuple(values)


class ProblemManager:
    """Load, echo and re-randomize ED problems"""

    def __init__(self, fixture_dir: str = DEFAULT_FIXTURE_DIR):
        self.fixture_dir = Path(fixture_dir)

    async def load_problem(self, path, seed: Optional[int] = None) -> EDProblem:
        """
        Load a problem file (or a JSON report of an earlier run)

        Args:
            path: problem file path
            seed: overrides the file's seed line
        """
        text = await config_manager.read_text(path)
        logger.debug(f"Loading problem from {path}")
        if text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ProblemValidationError(f"Invalid JSON report in {path}: {e}") from e
            return self.problem_from_report(data, seed)
        return self.parse_problem_text(text, seed)

    def parse_problem_text(self, text: str, seed: Optional[int] = None) -> EDProblem:
        entries: Dict[str, Tuple[str, int, int]] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0]
            if not content.strip():
                continue
            stripped = content.lstrip()
            match = _ASSIGNMENT.match(stripped)
            if not match:
                raise PolynomialSyntaxError("expected 'name = value'", 0).at_line(
                    line_no, len(content) - len(stripped))
            key = match.group("key")
            if key in entries:
                raise ProblemValidationError(f"line {line_no}: duplicate entry '{key}'")
            column = len(content) - len(stripped) + match.end()
            entries[key] = (stripped[match.end():].rstrip(), line_no, column)

        if "vars" not in entries:
            raise ProblemValidationError("missing 'vars' line")
        variables = tuple(v.strip() for v in entries["vars"][0].split(","))
        if any(not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v) for v in variables):
            raise ProblemValidationError(f"line {entries['vars'][1]}: invalid variable list")
        if len(set(variables)) != len(variables):
            raise ProblemValidationError(f"line {entries['vars'][1]}: duplicate variable names")

        if "seed" in entries:
            value, line_no, _ = entries["seed"]
            try:
                file_seed = int(value)
            except ValueError as e:
                raise ProblemValidationError(f"line {line_no}: seed must be an integer") from e
        else:
            file_seed = DEFAULT_SEED
        seed = file_seed if seed is None else seed

        equations = {}
        tolerances = []
        for key, (value, line_no, column) in entries.items():
            equation = _EQUATION_KEY.match(key)
            if equation:
                equations[int(equation.group("index"))] = (value, line_no, column)
            elif key.startswith("tol."):
                name = key[4:]
                if name not in DEFAULT_SETTINGS["tolerances"]:
                    raise ProblemValidationError(f"line {line_no}: unknown tolerance '{name}'")
                try:
                    tolerances.append((name, float(value)))
                except ValueError as e:
                    raise ProblemValidationError(f"line {line_no}: tolerance must be a number") from e
            elif key not in ("vars", "u", "seed"):
                raise ProblemValidationError(f"line {line_no}: unknown entry '{key}'")
        if sorted(equations) != list(range(1, len(equations) + 1)):
            raise ProblemValidationError(f"equations must be numbered f1..f{len(equations)}")

        sampler = coefficient_sampler(seed)
        polynomials, texts = [], []
        randomized = False
        for index in sorted(equations):
            value, line_no, column = equations[index]
            try:
                polynomials.append(parse_polynomial(value, variables, sampler))
            except PolynomialSyntaxError as e:
                raise e.at_line(line_no, column) from e
            texts.append(value)
            randomized = randomized or "?" in value

        if "u" in entries:
            u = _parse_rationals(entries["u"][0], entries["u"][1], "u")
            u_sampled = False
        else:
            u = sample_u(len(variables), seed)
            u_sampled = True
            logger.debug(f"Sampled data point u = {[format_rational(x) for x in u]}")

        problem = EDProblem(variables, tuple(polynomials), u, seed, randomized,
                            tuple(texts), u_sampled, tuple(tolerances))
        logger.info(f"Problem with n = {problem.n}, m = {problem.m}, seed {seed}"
                    f"{' (random coefficients)' if randomized else ''}")
        return problem

    def problem_from_report(self, data: Dict[str, Any], seed: Optional[int] = None) -> EDProblem:
        """Rebuild the exact problem a report was produced from"""
        try:
            echo = data["problem"]
            variables = tuple(echo["variables"])
            polynomials = tuple(parse_polynomial(text, variables) for text in echo["polynomials"])
            u = tuple(Fraction(x) for x in echo["u"])
            problem_seed = int(echo["seed"]) if seed is None else seed
            tolerances = tuple((name, float(value)) for name, value in echo.get("tolerances", {}).items())
            return EDProblem(variables, polynomials, u, problem_seed, bool(echo.get("randomized", False)),
                             tuple(echo["polynomials"]), False, tolerances)
        except EDDegError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ProblemValidationError(f"report does not contain a usable problem echo: {e}") from e

    def randomize_coefficients(self, problem: EDProblem, seed: int) -> EDProblem:
        """
        Redraw coefficients for a new seed: '?' entries when the problem
        came from text with '?', otherwise every coefficient on the same supports
        """
        sampler = coefficient_sampler(seed)
        if problem.texts and any("?" in text for text in problem.texts):
            polynomials = tuple(parse_polynomial(text, problem.variables, sampler) for text in problem.texts)
            texts = problem.texts
        else:
            polynomials = tuple(
                Polynomial.from_terms(f.arity, [(alpha, sampler()) for alpha in sorted(support(f))])
                for f in problem.polynomials)
            texts = tuple(f.to_text(problem.variables) for f in polynomials)
        u = sample_u(problem.n, seed) if problem.u_sampled else problem.u
        logger.warning(f"Coefficients redrawn with seed {seed}")
        return EDProblem(problem.variables, polynomials, u, seed, True, texts,
                         problem.u_sampled, problem.tolerances)

    def echo(self, problem: EDProblem) -> Dict[str, Any]:
        """JSON-safe description that reproduces the problem exactly"""
        return {
            "variables": list(problem.variables),
            "n": problem.n,
            "m": problem.m,
            "polynomials": [f.to_text(problem.variables) for f in problem.polynomials],
            "u": [format_rational(x) for x in problem.u],
            "u_sampled": problem.u_sampled,
            "seed": problem.seed,
            "randomized": problem.randomized,
            "tolerances": dict(problem.tolerances),
        }

    def list_fixtures(self) -> List[Path]:
        return sorted(self.fixture_dir.glob(f"*{PROBLEM_FILE_SUFFIX}"))


# Global problem manager instance
problem_manager = ProblemManager()


async def load_problem(path, seed: Optional[int] = None) -> EDProblem:
    return await problem_manager.load_problem(path, seed)
