"""Bundled example grammars.

The client/server grammar is the workhorse used throughout the test
suite and the README: a request/reply system with a logging aspect and
a capability-checking security aspect.
"""

from importlib import resources

from ..aspects import AspectedGrammar
from ..parser import GrammarDoc, parse_doc, resolve_doc


def fixture_text(name: str) -> str:
    return (resources.files(__package__) / f"{name}.gw").read_text()


def client_server_text() -> str:
    return fixture_text("client_server")


def client_server_doc() -> GrammarDoc:
    return parse_doc(client_server_text())


def client_server() -> AspectedGrammar:
    return resolve_doc(client_server_doc())
