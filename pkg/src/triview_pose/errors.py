"""Exception hierarchy shared by every module of the package."""


class PoseError(Exception):
    """Base class for all errors raised by triview_pose."""


class DegenerateConfiguration(PoseError):
    """Input geometry does not allow the requested computation."""


class PointAtInfinity(PoseError):
    """A homogeneous point has a vanishing last coordinate."""


class TriangulationDegenerate(PoseError):
    """Rays or back-projected planes do not intersect in a unique entity."""


class DegenerateLine(PoseError):
    """A line triplet whose first two back-projected planes coincide."""


class InsufficientConstraints(PoseError):
    """Fewer than 8 usable constraint rows."""


class NumericalFailure(PoseError):
    """A linear-algebra routine failed to converge."""


class DegenerateCandidate(PoseError):
    """A coefficient solution that cannot be turned into a rotation."""


class NoCandidates(PoseError):
    """No pose candidate survived the null-space solver."""


class TranslationDegenerate(PoseError):
    """The translation block of the constraint system is rank deficient."""


class ScoreUnavailable(PoseError):
    """Every feature failed to triangulate, so a pose cannot be scored."""


class NoValidPose(PoseError):
    """Pose selection was given nothing to choose from."""


class RobustFailure(PoseError):
    """RANSAC could not produce a pose."""


class SceneGenerationFailure(PoseError):
    """Synthetic scene generation exhausted its resampling budget."""


class ParseError(PoseError):
    """Malformed input file. Carries the offending file and line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class MissingData(PoseError):
    """A file required by the dataset loader is absent."""


class InsufficientData(PoseError):
    """Not enough three-view tracks for a requested feature combination."""
