# Triskells tests
