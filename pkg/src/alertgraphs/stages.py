"""Attack-stage taxonomy: 21 stages, each with a Low/Med/High severity tier."""

import enum


class Severity(enum.IntEnum):
    LOW = 0
    MED = 1
    HIGH = 2


class AttackStage(str, enum.Enum):
    """Attack-stage category assigned to an alert (value doubles as the acronym)."""

    # Low severity: reconnaissance and discovery
    SURFING = "SURFING"
    HOST_DISC = "HOST_DISC"
    SERVICE_DISC = "SERVICE_DISC"
    VULN_DISC = "VULN_DISC"
    INFO_DISC = "INFO_DISC"
    # Medium severity: access, execution and movement
    USER_PRIV_ESC = "USER_PRIV_ESC"
    ROOT_PRIV_ESC = "ROOT_PRIV_ESC"
    BRUTE_FORCE_CREDS = "BRUTE_FORCE_CREDS"
    ACCT_MANIP = "ACCT_MANIP"
    PUBLIC_APP_EXP = "PUBLIC_APP_EXP"
    REMOTE_SERVICE_EXP = "REMOTE_SERVICE_EXP"
    COMMAND_AND_CONTROL = "COMMAND_AND_CONTROL"
    LATERAL_MOVEMENT = "LATERAL_MOVEMENT"
    ARBITRARY_CODE_EXE = "ARBITRARY_CODE_EXE"
    PRIV_ESC = "PRIV_ESC"
    # High severity: end goals
    NETWORK_DOS = "NETWORK_DOS"
    RESOURCE_HIJACKING = "RESOURCE_HIJACKING"
    DATA_MANIPULATION = "DATA_MANIPULATION"
    DATA_EXFILTRATION = "DATA_EXFILTRATION"
    DATA_DELIVERY = "DATA_DELIVERY"
    DATA_DESTRUCTION = "DATA_DESTRUCTION"

    @property
    def severity(self) -> Severity:
        return _SEVERITIES[self]

    def __str__(self) -> str:
        return self.value


_SEVERITIES = {
    AttackStage.SURFING: Severity.LOW,
    AttackStage.HOST_DISC: Severity.LOW,
    AttackStage.SERVICE_DISC: Severity.LOW,
    AttackStage.VULN_DISC: Severity.LOW,
    AttackStage.INFO_DISC: Severity.LOW,
    AttackStage.USER_PRIV_ESC: Severity.MED,
    AttackStage.ROOT_PRIV_ESC: Severity.MED,
    AttackStage.BRUTE_FORCE_CREDS: Severity.MED,
    AttackStage.ACCT_MANIP: Severity.MED,
    AttackStage.PUBLIC_APP_EXP: Severity.MED,
    AttackStage.REMOTE_SERVICE_EXP: Severity.MED,
    AttackStage.COMMAND_AND_CONTROL: Severity.MED,
    AttackStage.LATERAL_MOVEMENT: Severity.MED,
    AttackStage.ARBITRARY_CODE_EXE: Severity.MED,
    AttackStage.PRIV_ESC: Severity.MED,
    AttackStage.NETWORK_DOS: Severity.HIGH,
    AttackStage.RESOURCE_HIJACKING: Severity.HIGH,
    AttackStage.DATA_MANIPULATION: Severity.HIGH,
    AttackStage.DATA_EXFILTRATION: Severity.HIGH,
    AttackStage.DATA_DELIVERY: Severity.HIGH,
    AttackStage.DATA_DESTRUCTION: Severity.HIGH,
}
