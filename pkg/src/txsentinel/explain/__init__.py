"""Alert explanations: deterministic template plus optional external generator."""

from .external import TOKEN_ENV_VAR, ExternalGeneratorConfig, external_generate, request_body
from .template import AlertContext, Explanation, cited_ids, render_explanation

__all__ = [
    "TOKEN_ENV_VAR",
    "AlertContext",
    "Explanation",
    "ExternalGeneratorConfig",
    "cited_ids",
    "external_generate",
    "render_explanation",
    "request_body",
]
