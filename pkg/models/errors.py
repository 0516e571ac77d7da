# models/errors.py
"""
synchrolab 예외 계층
각 예외는 CLI 종료 코드(exit_code)를 함께 가진다.
"""


class SynchrolabError(Exception):
    """모든 synchrolab 오류의 기본 클래스"""
    exit_code = 1


class InvalidParameterError(SynchrolabError):
    """잘못된 인자 (범위 밖의 n, 합성수 p, 잘못된 letter index 등)"""
    exit_code = 2


class CapacityExceededError(SynchrolabError):
    """설정된 용량 제한을 넘는 요청 (부분집합 BFS, chromatic, 열거)"""
    exit_code = 3


class InternalError(SynchrolabError):
    """불변식 위반 - 검증되지 않는 reset word, 인증서 불일치 등"""
    exit_code = 1
