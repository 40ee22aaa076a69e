"""Exceptions raised across the pipeline."""


class PipelineError(Exception):
    """Base class for all pipeline-specific failures."""


class PointBehindCamera(PipelineError):
    """A 3D point is behind (or on) the camera principal plane."""


class EmptyCloud(PipelineError):
    """Visibility culling removed every sampled surface point."""


class DegenerateCloud(PipelineError):
    """Point cloud is collinear or coplanar; no 3D model can be fitted."""


class FitDiverged(PipelineError):
    """Model fit hit the iteration cap without meeting the gradient tolerance."""


class ObjectBelowTable(PipelineError):
    """The object center violates the table plane; the scene is inconsistent."""


class Infeasible(PipelineError):
    """No grasp candidate satisfied the obstacle constraints from any start."""


class NoValidLandmarks(PipelineError):
    """Every hand landmark is masked in both cameras; no update possible."""


class FeatureNotVisible(PipelineError):
    """A servo feature point cannot be projected.

    Carries the offending camera name and point index.
    """

    def __init__(self, camera: str, point_index: int):
        self.camera = camera
        self.point_index = point_index
        super().__init__(f"feature point {point_index} not visible in {camera} camera")


class SingularDepth(PipelineError):
    """A feature point depth fell below the minimum usable depth."""


class IllConditioned(PipelineError):
    """The damped control system is numerically unusable."""


class DidNotConverge(PipelineError):
    """Servo loop hit the iteration cap above the termination threshold.

    Carries the final feature-error norm and the partial result.
    """

    def __init__(self, error_norm: float, result=None):
        self.error_norm = error_norm
        self.result = result
        super().__init__(f"servo loop did not converge (final error {error_norm:.3f} px)")


class ConfigError(PipelineError):
    """Scenario configuration failed schema validation."""
