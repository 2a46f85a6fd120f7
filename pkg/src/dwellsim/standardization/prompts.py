"""Prompt assembly for the standardization backend.

Each prompt is the fixed instruction block, the task-description block for
the kind, and a request section with the raw text appended untouched.
"""

from __future__ import annotations

from dwellsim.errors import EmptyInputError
from dwellsim.standardization.codes import TextKind

_VALIDATION_BLOCK = """2) Validation Check

- assign the validation check field to exactly one of the following values: "type1", "type2", or "type3".
type1: the provided information is valid, and you are able to standardize it with sufficient confidence.
type2: the provided information is partially valid, but it is insufficient or ambiguous, resulting in low confidence in standardization.
type3: the provided information is invalid, or cannot be standardized under any condition."""

_OUTPUT_BLOCK = """Output Requirements

- The output must be a single JSON object strictly following the provided schema.
- No additional fields are allowed.
- All key names and structures must match the schema exactly."""

KSIC_INSTRUCTION = """[Instruction]

You are a Port EDI Data Standardization Assistant and an expert in corporate industrial classification. Your role is to perform the following tasks based on the provided information:

1. Utilize owner information included in imported container records, along with relevant web search results.
2. Generate the output strictly according to the provided JSON schema."""

KSIC_TASK = f"""[Task Description]

1) KSIC Classification (Korean Standard Industrial Classification)

- Based on the inferred information, classify the company according to the KSIC system.
- The KSIC is Korea's national standard for industrial classification, derived from the UN's International Standard Industrial Classification (ISIC) and adapted to reflect the Korean industrial context.

{_VALIDATION_BLOCK}

3) Standardization

- High Level (Section): Represents the broadest industrial category, denoted by a single uppercase letter (A-U).
- Middle Level (Division): Two-digit numeric code that subdivides the Section.
- Low Level (Group): Three-digit numeric code that further subdivides the Division.
- Classify the company size as one of the following categories: SME, Mid, Large, or Unknown (use Unknown when information is unavailable).

{_OUTPUT_BLOCK}

JSON Scheme

{{
  owner: Input name of owner,
  size: Company size classification: one of ['SME', 'Mid', 'Large', 'Unknown'] (use 'Unknown' when information is unavailable),
  section1: High-level KSIC code (A-U, single uppercase letter),
  division2: Middle-level KSIC code (2 digits),
  group3: Low-level KSIC code (3 digits),
  validation_check: type1: valid information / type2: insufficient information / type3: invalid information,
  reason: Explanation of the KSIC standardization result
}}"""

HS_INSTRUCTION = """[Instruction]

You are a Port EDI Data Standardization Assistant and an expert in product classification. Your role is to perform the following tasks based on the provided information:

1. Standardize each cargo information according to the HS Code (Harmonized System) at the 2-, 4-, and 6-digit levels, following the official HS system.
2. Produce the output strictly in accordance with the provided JSON schema."""

HS_TASK = f"""[Task Description]

1) HS Code Classification

- Determine the HS Code (2-, 4-, and 6-digit levels) based on the cargo's essential nature (material/composition), primary function or use, degree of processing or form, and whether it is a finished or part item.

{_VALIDATION_BLOCK}

3) Standardization

- High Level (2-digit Chapter): Represents the broadest category, defined by the first two digits of the HS code.
- Middle Level (4-digit Heading): A four-digit numeric code that subdivides the Chapter, and must begin with the same two digits as the High Level.
- Low Level (6-digit Subheading): A six-digit numeric code that further subdivides the Heading, and must begin with the same four digits as the Middle Level.

{_OUTPUT_BLOCK}

JSON Scheme

{{
  cargo: The original cargo information exactly as entered (must not be modified, added, deleted, or reformatted in any way, including changes in case or spacing),
  hscod2: Two-digit HS Chapter code; enter null only if classification is not possible,
  hscod4: Four-digit HS Heading code; enter null only if classification is not possible,
  hscod6: Six-digit HS Subheading code; enter null only if classification is not possible,
  evidence_tokens: Key terms or tokens that influenced classification; enter an empty array if classification was not possible,
  validation_check: type1: valid information / type2: insufficient information / type3: invalid information,
  reason: Explanation of the HS standardization result
}}"""

REQUEST_HEADER = "[Request]"
_REQUEST = {
    TextKind.OI: ("Convert the following input information into JSON format according to the provided guidelines.",
                  "Owner Information: "),
    TextKind.CI: ("Standardize the following input information into JSON format according to the provided guidelines.",
                  "Container Information: "),
}


def _prefix(kind: TextKind) -> str:
    instruction, task = (HS_INSTRUCTION, HS_TASK) if kind is TextKind.CI else (KSIC_INSTRUCTION, KSIC_TASK)
    lead, label = _REQUEST[kind]
    return f"{instruction}\n\n{task}\n\n{REQUEST_HEADER}\n\n{lead}\n\n{label}"


_PREFIXES = {k: _prefix(k) for k in TextKind}


def build_prompt(raw: str, kind: TextKind | str) -> str:
    kind = TextKind(kind)
    if raw is None or not raw.strip():
        raise EmptyInputError("raw text is empty")
    return _PREFIXES[kind] + raw


def extract_raw(prompt: str) -> tuple[TextKind, str]:
    """Recover (kind, raw) from a prompt made by ``build_prompt``."""
    for kind, prefix in _PREFIXES.items():
        if prompt.startswith(prefix):
            return kind, prompt[len(prefix):]
    raise ValueError("prompt was not produced by build_prompt")
