"""stbench: LLM-assisted test generation and a native cyclic test bench
for IEC 61131-3 Structured Text function blocks."""

__version__ = "0.1.0"
