from .outputs import write_outputs
from .runner import RunArtifacts, run_scenario
from .scenario import ScenarioError, ScenarioSpec, UeSpec, load_scenario, parse_scenario
