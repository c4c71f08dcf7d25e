"""
Pydantic schemas for the JSON output of the command-line interface.

Curves are reported as lists of signed edge ids, the same notation the
curve text format uses.
"""

from typing import Optional

from pydantic import BaseModel, Field


class SurfaceSummary(BaseModel):
    """Topological summary of the surface a command ran on."""

    vertices: int = Field(..., ge=0, description="Number of vertices")
    edges: int = Field(..., ge=0, description="Number of edges")
    faces: int = Field(..., ge=0, description="Number of faces, perforated ones included")
    boundaries: int = Field(0, ge=0, description="Number of perforated faces")
    euler_characteristic: int = Field(..., description="V - E + F, perforated faces removed")
    genus: int = Field(..., ge=0, description="Genus of the closed surface")
    kind: str = Field(..., description="sphere, disk, cylinder, torus or hyperbolic")


class CanonicalResult(BaseModel):
    """Canonical form of a curve."""

    surface: SurfaceSummary
    input_length: int = Field(..., ge=0, description="Length of the input walk")
    canonical: list[int] = Field(
        default_factory=list, description="Canonical walk on the system of quads"
    )
    contractible: bool = Field(..., description="Whether the curve is null-homotopic")


class RootResult(BaseModel):
    """Primitive root of a curve."""

    root: list[int] = Field(default_factory=list, description="Primitive canonical root")
    multiplicity: int = Field(..., ge=0, description="Power of the root giving the curve")


class HomotopyResult(BaseModel):
    """Free homotopy test between two curves."""

    homotopic: bool = Field(..., description="Whether the curves are freely homotopic")
    first: list[int] = Field(default_factory=list, description="Canonical form of the first curve")
    second: list[int] = Field(
        default_factory=list, description="Canonical form of the second curve"
    )


class IntersectionResult(BaseModel):
    """Intersection number of one curve with itself or with another curve."""

    kind: str = Field(..., description="'self' or 'pair'")
    value: int = Field(..., ge=0, description="Minimal number of crossings")
    oracle: Optional[int] = Field(
        None, ge=0, description="Brute-force value when --oracle was requested"
    )


class ImmersionResult(BaseModel):
    """Minimally crossing immersion of a curve."""

    curve: list[int] = Field(default_factory=list, description="Immersed geodesic")
    crossings: int = Field(..., ge=0, description="Number of crossings of the immersion")
    swaps: int = Field(0, ge=0, description="Bigon swaps performed")
    immersion: str = Field("", description="Immersion in its text format")


class SimplicityResult(BaseModel):
    """Whether a curve is homotopic to a simple curve."""

    simple: bool = Field(..., description="Whether a homotopic simple curve exists")
    curve: Optional[list[int]] = Field(None, description="Embedded geodesic when simple")
    embedding: Optional[str] = Field(None, description="Embedding in the immersion text format")


class OracleResult(BaseModel):
    """Brute-force cross-check of the intersection numbers."""

    computed: int = Field(..., ge=0, description="Value from the counting pipeline")
    oracle: int = Field(..., ge=0, description="Value from exhaustive enumeration")
    agree: bool = Field(..., description="Whether both values are equal")
    geodesics: int = Field(0, ge=0, description="Homotopic geodesics enumerated")
